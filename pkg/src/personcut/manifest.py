"""Loading and validation of segmentation manifests.

A manifest is the JSON interchange file produced by whatever ran the
segmentation model: per-frame detections with class ids, scores, boxes, and
run-length masks, plus frame-rate metadata. Loading here is the boundary that
keeps any neural-network runtime out of the compositing pipeline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import BinaryMask, BoundingBox, Detection, RleCounts, rle_decode
from .errors import (
    ManifestParseError,
    ManifestSchemaError,
    ManifestValidationError,
    MaskCodecError,
)

__all__ = [
    "FrameSegmentation",
    "SequenceManifest",
    "ValidationReport",
    "load_manifest",
    "validate_against_frames",
]

MANIFEST_VERSION = 1
DEFAULT_SCORE_THRESHOLD = 0.5


@dataclass(frozen=True)
class FrameSegmentation:
    """All detections for one frame; instance ids are 0..len(detections)-1 in order."""

    frame_index: int
    detections: tuple[Detection, ...]


@dataclass(frozen=True)
class SequenceManifest:
    """A whole sequence's segmentations plus the metadata needed to rebuild a video."""

    frame_width: int
    frame_height: int
    frame_rate: Fraction
    category_table: dict[int, str]
    frames: tuple[FrameSegmentation, ...]

    @property
    def frame_count(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a manifest against a frame source; empty means consistent."""

    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ManifestSchemaError(f"{path}: missing required field '{key}'")
    return obj[key]


def _as_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ManifestSchemaError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _as_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ManifestSchemaError(f"{path}: expected an array, got {type(value).__name__}")
    return value


def _as_int(value, path: str) -> int:
    # bool is an int subtype in Python; reject it explicitly.
    if isinstance(value, bool) or not isinstance(value, int):
        raise ManifestSchemaError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_positive_int(value, path: str) -> int:
    n = _as_int(value, path)
    if n < 1:
        raise ManifestSchemaError(f"{path}: expected a positive integer, got {n}")
    return n


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ManifestSchemaError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _check_unknown(obj: dict, known: set[str], path: str, strict: bool) -> None:
    if not strict:
        return
    unknown = set(obj) - known
    if unknown:
        name = sorted(unknown)[0]
        raise ManifestSchemaError(f"{path}: unknown field '{name}' (use lenient mode to ignore)")


def _parse_frame_rate(obj, path: str, strict: bool) -> Fraction:
    rate = _as_object(obj, path)
    num = _as_positive_int(_require(rate, "num", path), f"{path}.num")
    den = _as_positive_int(_require(rate, "den", path), f"{path}.den")
    _check_unknown(rate, {"num", "den"}, path, strict)
    return Fraction(num, den)


def _parse_categories(obj, path: str) -> dict[int, str]:
    table = _as_object(obj, path)
    out: dict[int, str] = {}
    for key, name in table.items():
        try:
            class_id = int(key)
        except ValueError:
            raise ManifestSchemaError(f"{path}: key '{key}' is not an integer class id") from None
        if not isinstance(name, str):
            raise ManifestSchemaError(f"{path}.{key}: expected a string class name, got {name!r}")
        out[class_id] = name
    return out


def _parse_detection(
    obj,
    path: str,
    *,
    frame_index: int,
    position: int,
    frame_width: int,
    frame_height: int,
    category_table: dict[int, str],
    strict: bool,
) -> Detection:
    det = _as_object(obj, path)
    class_id = _as_int(_require(det, "class_id", path), f"{path}.class_id")
    score = _as_number(_require(det, "score", path), f"{path}.score")
    bbox_raw = _as_list(_require(det, "bbox", path), f"{path}.bbox")
    rle_raw = _as_object(_require(det, "mask_rle", path), f"{path}.mask_rle")
    _check_unknown(det, {"class_id", "score", "bbox", "mask_rle"}, path, strict)

    where = f"frame {frame_index}, detection {position}"
    if class_id not in category_table:
        raise ManifestValidationError(f"{where}: class_id {class_id} is not in the category table")
    if not 0.0 <= score <= 1.0:
        raise ManifestValidationError(f"{where}: score {score} outside [0, 1]")

    if len(bbox_raw) != 4:
        raise ManifestSchemaError(f"{path}.bbox: expected [y1, x1, y2, x2], got {len(bbox_raw)} values")
    y1, x1, y2, x2 = (_as_int(v, f"{path}.bbox[{i}]") for i, v in enumerate(bbox_raw))
    try:
        bbox = BoundingBox(y1, x1, y2, x2)
    except ValueError as exc:
        raise ManifestValidationError(f"{where}: {exc}") from None
    if y2 > frame_height or x2 > frame_width:
        raise ManifestValidationError(
            f"{where}: bbox {(y1, x1, y2, x2)} exceeds the "
            f"{frame_width}x{frame_height} frame bounds"
        )

    size_raw = _as_list(_require(rle_raw, "size", path), f"{path}.mask_rle.size")
    counts_raw = _as_list(_require(rle_raw, "counts", path), f"{path}.mask_rle.counts")
    _check_unknown(rle_raw, {"size", "counts"}, f"{path}.mask_rle", strict)
    if len(size_raw) != 2:
        raise ManifestSchemaError(f"{path}.mask_rle.size: expected [height, width]")
    mh = _as_positive_int(size_raw[0], f"{path}.mask_rle.size[0]")
    mw = _as_positive_int(size_raw[1], f"{path}.mask_rle.size[1]")
    if (mh, mw) != (frame_height, frame_width):
        raise ManifestValidationError(
            f"{where}: mask size {mh}x{mw} does not match the frame "
            f"size {frame_height}x{frame_width}"
        )
    counts = tuple(_as_int(c, f"{path}.mask_rle.counts[{i}]") for i, c in enumerate(counts_raw))
    if any(c < 0 for c in counts):
        raise ManifestValidationError(f"{where}: negative run count in mask_rle")
    try:
        mask = rle_decode(RleCounts(counts, (mh, mw)))
    except MaskCodecError as exc:
        raise ManifestValidationError(f"{where}: {exc}") from None

    return Detection(
        instance_id=position,  # re-assigned after score filtering
        class_id=class_id,
        class_name=category_table[class_id],
        score=score,
        bbox=bbox,
        mask=mask,
    )


def load_manifest(
    path: str | Path,
    *,
    score_threshold: float = DEFAULT_SCORE_THRESHOLD,
    strict: bool = True,
) -> SequenceManifest:
    """Load and fully validate a manifest file.

    Detections scoring below score_threshold are dropped, and instance ids
    number the retained detections 0.. in file order (a selection by explicit
    ids therefore refers to post-threshold ids). Strict mode rejects unknown
    fields anywhere in the document.
    """
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ManifestParseError(f"{path}: {exc}") from None

    root = _as_object(doc, "$")
    version = _as_int(_require(root, "version", "$"), "$.version")
    if version != MANIFEST_VERSION:
        raise ManifestSchemaError(f"$.version: expected {MANIFEST_VERSION}, got {version}")
    frame_width = _as_positive_int(_require(root, "frame_width", "$"), "$.frame_width")
    frame_height = _as_positive_int(_require(root, "frame_height", "$"), "$.frame_height")
    frame_rate = _parse_frame_rate(_require(root, "frame_rate", "$"), "$.frame_rate", strict)
    category_table = _parse_categories(_require(root, "categories", "$"), "$.categories")
    frames_raw = _as_list(_require(root, "frames", "$"), "$.frames")
    _check_unknown(
        root,
        {"version", "frame_width", "frame_height", "frame_rate", "categories", "frames"},
        "$",
        strict,
    )

    frames: list[FrameSegmentation] = []
    for i, frame_obj in enumerate(frames_raw):
        fpath = f"$.frames[{i}]"
        frame = _as_object(frame_obj, fpath)
        frame_index = _as_int(_require(frame, "frame_index", fpath), f"{fpath}.frame_index")
        detections_raw = _as_list(_require(frame, "detections", fpath), f"{fpath}.detections")
        _check_unknown(frame, {"frame_index", "detections"}, fpath, strict)
        if frame_index != i:
            raise ManifestValidationError(
                f"frame indices must be contiguous from 0: entry {i} has frame_index {frame_index}"
            )

        kept: list[Detection] = []
        for j, det_obj in enumerate(detections_raw):
            det = _parse_detection(
                det_obj,
                f"{fpath}.detections[{j}]",
                frame_index=frame_index,
                position=j,
                frame_width=frame_width,
                frame_height=frame_height,
                category_table=category_table,
                strict=strict,
            )
            if det.score >= score_threshold:
                kept.append(det)
        renumbered = tuple(
            Detection(
                instance_id=k,
                class_id=d.class_id,
                class_name=d.class_name,
                score=d.score,
                bbox=d.bbox,
                mask=d.mask,
            )
            for k, d in enumerate(kept)
        )
        frames.append(FrameSegmentation(frame_index=frame_index, detections=renumbered))

    return SequenceManifest(
        frame_width=frame_width,
        frame_height=frame_height,
        frame_rate=frame_rate,
        category_table=category_table,
        frames=tuple(frames),
    )


def validate_against_frames(
    manifest: SequenceManifest,
    frame_count: int,
    width: int,
    height: int,
) -> ValidationReport:
    """Check that a manifest describes the given frame source; collects every mismatch."""
    mismatches: list[str] = []
    if manifest.frame_count != frame_count:
        mismatches.append(
            f"manifest has {manifest.frame_count} frames but the source has {frame_count}"
        )
    if (manifest.frame_width, manifest.frame_height) != (width, height):
        mismatches.append(
            f"manifest frames are {manifest.frame_width}x{manifest.frame_height} "
            f"but the source is {width}x{height}"
        )
    return ValidationReport(tuple(mismatches))
