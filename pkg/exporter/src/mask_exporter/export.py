"""Turn model detections into the manifest JSON the extraction pipeline reads.

The manifest schema: version 1, frame dimensions and rate, a category
table, and per-frame detections carrying class, score, an integer
[y1, x1, y2, x2] box, and a column-major run-length encoded mask. Masks
are binarized at 0.5; boxes are clamped to the frame; every model class is
exported, since filtering to persons is the consumer's job.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from PIL import Image

from .backends import (
    TORCHVISION_MODEL_ID,
    RawDetection,
    SegmentationBackend,
    TorchvisionBackend,
)
from .errors import ExportError

__all__ = ["MASK_THRESHOLD", "ExportConfig", "export"]

MASK_THRESHOLD = 0.5

_FRAME_NAME = re.compile(r"frame_(\d{6,})\.(png|ppm)\Z")


@dataclass(frozen=True)
class ExportConfig:
    input_path: str
    output_path: str
    score_floor: float = 0.5
    device: str = "cpu"
    model: str = TORCHVISION_MODEL_ID
    frame_rate: Fraction = field(default_factory=lambda: Fraction(30))

    def __post_init__(self) -> None:
        if not 0.0 <= self.score_floor <= 1.0:
            raise ValueError(f"score floor must be in [0, 1], got {self.score_floor}")
        if self.frame_rate <= 0:
            raise ValueError(f"frame rate must be positive, got {self.frame_rate}")


def _read_rgb(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise ExportError(f"{path}: cannot read image ({exc})") from exc


def _input_frames(path: Path) -> list[Path]:
    """The ordered frame files for an input: one still, or a frame directory."""
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise ExportError(f"{path}: no such file or directory")
    indexed = {}
    for entry in sorted(path.iterdir()):
        match = _FRAME_NAME.fullmatch(entry.name)
        if match is None:
            continue
        index = int(match.group(1))
        if index in indexed:
            raise ExportError(f"{path}: duplicate frame index {index}")
        indexed[index] = entry
    if not indexed:
        raise ExportError(f"{path}: no frame_NNNNNN.png/.ppm files found")
    frames = []
    for want in range(len(indexed)):
        if want not in indexed:
            raise ExportError(f"{path}: missing frame index {want}")
        frames.append(indexed[want])
    return frames


def _rle_counts(mask: np.ndarray) -> list[int]:
    """Column-major run lengths, zero run first (possibly of length 0)."""
    flat = mask.ravel(order="F")
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0]:
        counts.insert(0, 0)
    return [int(c) for c in counts]


def _clamp_box(
    box: tuple[float, float, float, float], width: int, height: int
) -> list[int]:
    y1, x1, y2, x2 = box
    y1 = min(max(int(math.floor(y1)), 0), height)
    x1 = min(max(int(math.floor(x1)), 0), width)
    y2 = min(max(int(math.ceil(y2)), y1), height)
    x2 = min(max(int(math.ceil(x2)), x1), width)
    return [y1, x1, y2, x2]


def _detection_payload(det: RawDetection, width: int, height: int) -> dict:
    mask = np.asarray(det.mask)
    if mask.shape != (height, width):
        raise ExportError(
            f"backend returned a {mask.shape[0]}x{mask.shape[1]} mask for a "
            f"{height}x{width} frame"
        )
    binary = mask > MASK_THRESHOLD
    return {
        "class_id": int(det.class_id),
        "score": float(det.score),
        "bbox": _clamp_box(det.box, width, height),
        "mask_rle": {"size": [height, width], "counts": _rle_counts(binary)},
    }


def export(config: ExportConfig, backend: SegmentationBackend | None = None) -> dict:
    """Run the model over the input and write the manifest; returns the payload.

    Every input frame yields a manifest frame, empty when nothing clears the
    score floor.
    """
    if backend is None:
        if config.model != TORCHVISION_MODEL_ID:
            raise ExportError(
                f"unknown model {config.model!r}; built in: {TORCHVISION_MODEL_ID}"
            )
        backend = TorchvisionBackend(device=config.device)

    frame_paths = _input_frames(Path(config.input_path))
    first = _read_rgb(frame_paths[0])
    height, width = first.shape[:2]

    frames = []
    for index, frame_path in enumerate(frame_paths):
        pixels = first if index == 0 else _read_rgb(frame_path)
        if pixels.shape[:2] != (height, width):
            raise ExportError(
                f"{frame_path}: frame is {pixels.shape[1]}x{pixels.shape[0]}, "
                f"expected {width}x{height}"
            )
        detections = [
            _detection_payload(det, width, height)
            for det in backend.infer(pixels)
            if det.score >= config.score_floor
        ]
        frames.append({"frame_index": index, "detections": detections})

    payload = {
        "version": 1,
        "frame_width": width,
        "frame_height": height,
        "frame_rate": {
            "num": config.frame_rate.numerator,
            "den": config.frame_rate.denominator,
        },
        "categories": {str(cid): name for cid, name in backend.categories().items()},
        "frames": frames,
    }
    with open(config.output_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return payload
