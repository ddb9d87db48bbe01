"""Person extraction and background replacement from segmentation manifests.

The library takes frame sequences (or stills) plus instance-segmentation
manifests, selects the wanted persons per frame, and composites them onto a
new background. See the README for the CLI and the manifest format.
"""

from .compositing import (
    ResizePolicy,
    composite,
    composite_layers,
    letterbox_placement,
    resize_image,
    resize_mask,
)
from .core import (
    BinaryMask,
    BoundingBox,
    Detection,
    RasterImage,
    RleCounts,
    bbox_area,
    mask_union,
    rle_decode,
    rle_encode,
)
from .errors import (
    DimensionMismatchError,
    ExtractError,
    FrameDirectoryError,
    FrameProcessError,
    ImageFormatError,
    ManifestError,
    ManifestParseError,
    ManifestSchemaError,
    ManifestValidationError,
    MaskCodecError,
    SelectionError,
    StreamTruncationError,
)
from .frameio import (
    DirectorySink,
    FrameDirectorySource,
    FrameSink,
    FrameSource,
    MemorySource,
    RawFileSource,
    RawStreamSink,
    RawStreamSource,
    SingleImageSink,
    StillImageSource,
    enumerate_frames,
    read_image,
    write_image,
)
from .manifest import (
    DEFAULT_SCORE_THRESHOLD,
    MANIFEST_VERSION,
    FrameSegmentation,
    SequenceManifest,
    ValidationReport,
    load_manifest,
    validate_against_frames,
)
from .pipeline import (
    CompositeJob,
    FrameResult,
    SourceFrame,
    SourceSpec,
    job_output_length,
    output_frame_rate,
    output_length,
    process_frame,
    process_sequence,
)
from .selection import (
    ExplicitIds,
    RankedPerson,
    SelectionSpec,
    TopN,
    filter_persons,
    rank_by_area,
    select,
)

__version__ = "0.1.0"

__all__ = [
    "ResizePolicy",
    "composite",
    "composite_layers",
    "letterbox_placement",
    "resize_image",
    "resize_mask",
    "BinaryMask",
    "BoundingBox",
    "Detection",
    "RasterImage",
    "RleCounts",
    "bbox_area",
    "mask_union",
    "rle_decode",
    "rle_encode",
    "DimensionMismatchError",
    "ExtractError",
    "FrameDirectoryError",
    "FrameProcessError",
    "ImageFormatError",
    "ManifestError",
    "ManifestParseError",
    "ManifestSchemaError",
    "ManifestValidationError",
    "MaskCodecError",
    "SelectionError",
    "StreamTruncationError",
    "DirectorySink",
    "FrameDirectorySource",
    "FrameSink",
    "FrameSource",
    "MemorySource",
    "RawFileSource",
    "RawStreamSink",
    "RawStreamSource",
    "SingleImageSink",
    "StillImageSource",
    "enumerate_frames",
    "read_image",
    "write_image",
    "DEFAULT_SCORE_THRESHOLD",
    "MANIFEST_VERSION",
    "FrameSegmentation",
    "SequenceManifest",
    "ValidationReport",
    "load_manifest",
    "validate_against_frames",
    "CompositeJob",
    "FrameResult",
    "SourceFrame",
    "SourceSpec",
    "job_output_length",
    "output_frame_rate",
    "output_length",
    "process_frame",
    "process_sequence",
    "ExplicitIds",
    "RankedPerson",
    "SelectionSpec",
    "TopN",
    "filter_persons",
    "rank_by_area",
    "select",
    "__version__",
]
