"""Command-line front end: exporter --in <path> --out <manifest.json>.

Exit codes: 0 manifest written, 1 export error (model unavailable, bad
input), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Sequence

from .backends import TORCHVISION_MODEL_ID
from .errors import ExportError
from .export import ExportConfig, export

__all__ = ["parse_args", "run", "main"]


def _score(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"score floor must be in [0, 1], got {value}")
    return value


def _rate(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"rate must be a number or fraction, got {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"rate must be positive, got {text!r}")
    return value


def parse_args(argv: Sequence[str] | None = None) -> ExportConfig:
    parser = argparse.ArgumentParser(
        prog="exporter",
        description=(
            "Run a pretrained instance-segmentation model over an image or "
            "frame directory and write a detection manifest."
        ),
    )
    parser.add_argument(
        "--in", dest="input_path", required=True, metavar="PATH",
        help="still image or frame_NNNNNN.png directory",
    )
    parser.add_argument(
        "--out", dest="output_path", required=True, metavar="JSON",
        help="manifest file to write",
    )
    parser.add_argument(
        "--score", type=_score, default=0.5, metavar="F",
        help="drop detections scoring below this (default 0.5)",
    )
    parser.add_argument(
        "--device", default="cpu", metavar="D",
        help="model device hint, e.g. cpu or cuda (default cpu)",
    )
    parser.add_argument(
        "--model", default=TORCHVISION_MODEL_ID, metavar="ID",
        help=f"model identifier (default {TORCHVISION_MODEL_ID})",
    )
    parser.add_argument(
        "--rate", type=_rate, default=Fraction(30), metavar="FPS",
        help="frame rate to record in the manifest (default 30; fractions ok)",
    )
    ns = parser.parse_args(argv)
    return ExportConfig(
        input_path=ns.input_path,
        output_path=ns.output_path,
        score_floor=ns.score,
        device=ns.device,
        model=ns.model,
        frame_rate=ns.rate,
    )


def run(config: ExportConfig) -> int:
    try:
        payload = export(config)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    detections = sum(len(f["detections"]) for f in payload["frames"])
    print(
        f"wrote {config.output_path}: {len(payload['frames'])} frame(s), "
        f"{detections} detection(s)",
        file=sys.stderr,
    )
    return 0


def main(argv: Sequence[str] | None = None) -> None:
    raise SystemExit(run(parse_args(argv)))


if __name__ == "__main__":
    main()
