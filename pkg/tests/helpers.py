"""Builders shared across test modules: manifest dicts, masks, detections."""

import json
from fractions import Fraction

import numpy as np

from personcut import (
    BinaryMask,
    BoundingBox,
    Detection,
    FrameSegmentation,
    SequenceManifest,
    rle_encode,
)

CATEGORIES = {1: "person", 18: "dog"}


def rle_dict(mask: np.ndarray) -> dict:
    encoded = rle_encode(BinaryMask.from_array(mask))
    return {"size": [mask.shape[0], mask.shape[1]], "counts": list(encoded.counts)}


def detection_dict(class_id, score, bbox, mask) -> dict:
    return {
        "class_id": class_id,
        "score": score,
        "bbox": list(bbox),
        "mask_rle": rle_dict(mask),
    }


def manifest_dict(width, height, frames, *, categories=None, rate=(30, 1)) -> dict:
    if categories is None:
        categories = {"1": "person", "18": "dog"}
    return {
        "version": 1,
        "frame_width": width,
        "frame_height": height,
        "frame_rate": {"num": rate[0], "den": rate[1]},
        "categories": dict(categories),
        "frames": [
            {"frame_index": i, "detections": list(dets)}
            for i, dets in enumerate(frames)
        ],
    }


def write_json(path, payload) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    return str(path)


def box_mask(height, width, y1, x1, y2, x2) -> np.ndarray:
    mask = np.zeros((height, width), dtype=bool)
    mask[y1:y2, x1:x2] = True
    return mask


def random_image(rng, height, width) -> np.ndarray:
    return rng.integers(0, 256, (height, width, 3), dtype=np.uint8)


def seg_frame(index, specs, *, score=0.9) -> FrameSegmentation:
    """Build a FrameSegmentation from (class_id, bbox_tuple, mask_array) specs."""
    detections = tuple(
        Detection(
            instance_id=k,
            class_id=class_id,
            class_name=CATEGORIES[class_id],
            score=score,
            bbox=BoundingBox(*bbox),
            mask=BinaryMask.from_array(mask),
        )
        for k, (class_id, bbox, mask) in enumerate(specs)
    )
    return FrameSegmentation(frame_index=index, detections=detections)


def memory_manifest(width, height, per_frame_specs, rate=Fraction(30)) -> SequenceManifest:
    """Build a SequenceManifest directly, without the JSON round trip."""
    frames = tuple(seg_frame(i, specs) for i, specs in enumerate(per_frame_specs))
    return SequenceManifest(
        frame_width=width,
        frame_height=height,
        frame_rate=rate,
        category_table=dict(CATEGORIES),
        frames=frames,
    )
