"""Export instance-segmentation results as detection manifests.

Runs a pretrained model (or any injected backend) over an image or frame
directory and writes the JSON manifest format consumed by the person
extraction pipeline.
"""

from .backends import (
    TORCHVISION_MODEL_ID,
    RawDetection,
    SegmentationBackend,
    TorchvisionBackend,
)
from .errors import ExportError, ModelUnavailableError
from .export import MASK_THRESHOLD, ExportConfig, export

__version__ = "0.1.0"

__all__ = [
    "ExportConfig",
    "ExportError",
    "MASK_THRESHOLD",
    "ModelUnavailableError",
    "RawDetection",
    "SegmentationBackend",
    "TORCHVISION_MODEL_ID",
    "TorchvisionBackend",
    "export",
    "__version__",
]
