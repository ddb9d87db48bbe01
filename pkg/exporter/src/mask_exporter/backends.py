"""Segmentation model backends.

A backend owns the category table and per-image inference. export() takes
any object satisfying SegmentationBackend, so tests can substitute a
deterministic stub and other model families can be plugged in without
touching the manifest writer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from .errors import ModelUnavailableError

__all__ = [
    "RawDetection",
    "SegmentationBackend",
    "TorchvisionBackend",
    "TORCHVISION_MODEL_ID",
]

TORCHVISION_MODEL_ID = "torchvision/maskrcnn_resnet50_fpn"

_WEIGHTS_URL = (
    "https://download.pytorch.org/models/maskrcnn_resnet50_fpn_coco-bf2d0c1e.pth"
)


@dataclass(frozen=True)
class RawDetection:
    """One model detection, before thresholding and serialization.

    box is (y1, x1, y2, x2) in pixels, possibly fractional and possibly
    sticking out of the frame; mask is a (height, width) array of soft
    probabilities or booleans at full frame resolution.
    """

    class_id: int
    score: float
    box: tuple[float, float, float, float]
    mask: np.ndarray


class SegmentationBackend(Protocol):
    def categories(self) -> Mapping[int, str]:
        """Class id to class name for every class the model can emit."""
        ...

    def infer(self, pixels: np.ndarray) -> Sequence[RawDetection]:
        """Detections for one (height, width, 3) uint8 RGB frame."""
        ...


class TorchvisionBackend:
    """COCO-pretrained Mask R-CNN from torchvision.

    Construction imports torch lazily and loads the pretrained checkpoint;
    both failure modes raise ModelUnavailableError with the fix spelled out,
    so a missing 170 MB download surfaces before any frame is processed.
    """

    def __init__(self, device: str = "cpu"):
        try:
            import torch
            from torchvision.models.detection import (
                MaskRCNN_ResNet50_FPN_Weights,
                maskrcnn_resnet50_fpn,
            )
        except ImportError as exc:
            raise ModelUnavailableError(
                "torchvision is not installed; install the model extra "
                "(pip install torch torchvision) to run the pretrained model"
            ) from exc
        weights = MaskRCNN_ResNet50_FPN_Weights.COCO_V1
        try:
            model = maskrcnn_resnet50_fpn(weights=weights)
        except Exception as exc:
            raise ModelUnavailableError(
                f"could not load the pretrained checkpoint: {exc}; expected "
                f"{_WEIGHTS_URL} in the torch cache (TORCH_HOME, default "
                "~/.cache/torch); download it on a connected machine and "
                "copy it there"
            ) from exc
        self._torch = torch
        self._device = torch.device(device)
        self._model = model.eval().to(self._device)
        names = weights.meta["categories"]
        self._categories = {
            i: name
            for i, name in enumerate(names)
            if name not in ("__background__", "N/A")
        }

    def categories(self) -> Mapping[int, str]:
        return dict(self._categories)

    def infer(self, pixels: np.ndarray) -> Sequence[RawDetection]:
        torch = self._torch
        tensor = torch.from_numpy(np.ascontiguousarray(pixels))
        tensor = tensor.permute(2, 0, 1).float() / 255.0
        with torch.no_grad():
            output = self._model([tensor.to(self._device)])[0]
        labels = output["labels"].cpu().numpy()
        scores = output["scores"].cpu().numpy()
        boxes = output["boxes"].cpu().numpy()  # (x1, y1, x2, y2)
        masks = output["masks"].cpu().numpy()  # (N, 1, H, W) soft
        detections = []
        for label, score, (x1, y1, x2, y2), mask in zip(labels, scores, boxes, masks):
            detections.append(
                RawDetection(
                    class_id=int(label),
                    score=float(score),
                    box=(float(y1), float(x1), float(y2), float(x2)),
                    mask=mask[0],
                )
            )
        return detections
