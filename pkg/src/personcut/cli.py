"""Command-line front end.

Binds inputs, selection, resize policy, workers, and output into one job and
runs it. Repeat --source/--manifest/--select to composite several inputs;
their command-line order is the stacking order, later sources painting over
earlier ones.

Exit codes: 0 all frames written, 1 processing error (an output directory
that received partial results is marked with an INCOMPLETE sentinel file),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .compositing import ResizePolicy
from .core import RasterImage
from .errors import ExtractError
from .frameio import (
    DirectorySink,
    FrameDirectorySource,
    FrameSink,
    FrameSource,
    RawFileSource,
    RawStreamSink,
    SingleImageSink,
    StillImageSource,
    read_image,
)
from .manifest import load_manifest
from .pipeline import (
    CompositeJob,
    SourceSpec,
    job_output_length,
    output_frame_rate,
    process_sequence,
)
from .selection import ExplicitIds, SelectionSpec, TopN

__all__ = ["RawGeometry", "CliConfig", "parse_args", "run", "main"]

logger = logging.getLogger(__name__)

_RAW_SUFFIXES = {".rgb24", ".raw", ".rgb"}
_IMAGE_SUFFIXES = {".png", ".ppm"}


@dataclass(frozen=True)
class RawGeometry:
    """Out-of-band shape of a headerless raw RGB24 stream."""

    width: int
    height: int
    rate: Fraction

    def format(self) -> str:
        return f"{self.width}x{self.height}@{self.rate}"


@dataclass(frozen=True)
class CliConfig:
    sources: tuple[str, ...]
    manifests: tuple[str, ...]
    selections: tuple[SelectionSpec, ...]
    background: str
    out: str
    resize_policy: ResizePolicy
    workers: int
    score_threshold: float
    exhaustion: str
    feather: int
    raw_in: RawGeometry | None
    raw_out: RawGeometry | None
    lenient: bool
    emit_selection: str | None
    verbose: bool

    def to_argv(self) -> list[str]:
        """Flag list that re-parses to an identical config."""
        argv: list[str] = []
        for source, manifest, selection in zip(self.sources, self.manifests, self.selections):
            argv += ["--source", source, "--manifest", manifest]
            argv += ["--select", _format_selection(selection)]
        argv += ["--background", self.background, "--out", self.out]
        argv += ["--resize", _format_resize(self.resize_policy)]
        argv += ["--filter", self.resize_policy.image_filter]
        argv += ["--workers", str(self.workers)]
        argv += ["--score-threshold", repr(self.score_threshold)]
        argv += ["--exhaustion", self.exhaustion]
        argv += ["--feather", str(self.feather)]
        if self.raw_in is not None:
            argv += ["--raw-in", self.raw_in.format()]
        if self.raw_out is not None:
            argv += ["--raw-out", self.raw_out.format()]
        if self.lenient:
            argv.append("--lenient")
        if self.emit_selection is not None:
            argv += ["--emit-selection", self.emit_selection]
        if self.verbose:
            argv.append("--verbose")
        return argv


def _parse_selection(text: str) -> SelectionSpec:
    kind, sep, rest = text.partition(":")
    if kind == "top" and sep:
        try:
            n = int(rest)
        except ValueError:
            raise argparse.ArgumentTypeError(f"top:<n> needs an integer, got {rest!r}")
        if n < 1:
            raise argparse.ArgumentTypeError(f"top:<n> needs n >= 1, got {n}")
        return TopN(n)
    if kind == "ids" and sep:
        try:
            ids = [int(part) for part in rest.split(",") if part != ""]
        except ValueError:
            raise argparse.ArgumentTypeError(f"ids:<list> needs integers, got {rest!r}")
        if not ids or any(i < 0 for i in ids):
            raise argparse.ArgumentTypeError(
                f"ids:<list> needs one or more non-negative ids, got {rest!r}"
            )
        return ExplicitIds(frozenset(ids))
    raise argparse.ArgumentTypeError(
        f"selection must be top:<n> or ids:<comma list>, got {text!r}"
    )


def _format_selection(spec: SelectionSpec) -> str:
    if isinstance(spec, TopN):
        return f"top:{spec.n}"
    return "ids:" + ",".join(str(i) for i in sorted(spec.ids))


def _parse_resize(text: str) -> tuple[str, tuple[int, int, int]]:
    mode, sep, pad = text.partition(":")
    if mode == "stretch" and not sep:
        return "stretch", (0, 0, 0)
    if mode == "letterbox":
        if not sep:
            return "letterbox", (0, 0, 0)
        if len(pad) == 6 and all(c in "0123456789abcdefABCDEF" for c in pad):
            return "letterbox", (int(pad[0:2], 16), int(pad[2:4], 16), int(pad[4:6], 16))
        raise argparse.ArgumentTypeError(
            f"letterbox pad color must be 6 hex digits (RRGGBB), got {pad!r}"
        )
    raise argparse.ArgumentTypeError(
        f"resize mode must be stretch or letterbox[:RRGGBB], got {text!r}"
    )


def _format_resize(policy: ResizePolicy) -> str:
    if policy.mode == "stretch":
        return "stretch"
    r, g, b = policy.pad_color
    return f"letterbox:{r:02x}{g:02x}{b:02x}"


def _parse_raw_geometry(text: str) -> RawGeometry:
    shape, sep, rate_text = text.partition("@")
    w_text, x, h_text = shape.partition("x")
    try:
        if not (sep and x):
            raise ValueError
        width = int(w_text)
        height = int(h_text)
        rate = Fraction(rate_text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(
            f"raw geometry must be WxH@FPS (FPS may be a fraction), got {text!r}"
        )
    if width < 1 or height < 1 or rate <= 0:
        raise argparse.ArgumentTypeError(f"raw geometry values must be positive, got {text!r}")
    return RawGeometry(width, height, rate)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _score(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"score threshold must be in [0, 1], got {value}")
    return value


def _is_raw_path(path: str) -> bool:
    return Path(path).suffix.lower() in _RAW_SUFFIXES


def parse_args(argv: Sequence[str] | None = None) -> CliConfig:
    parser = argparse.ArgumentParser(
        prog="extract",
        description=(
            "Cut the selected persons out of each input and composite them "
            "onto a new background."
        ),
    )
    parser.add_argument(
        "--source",
        action="append",
        default=[],
        metavar="PATH",
        help="frame directory, still image, or raw .rgb24 file (repeatable)",
    )
    parser.add_argument(
        "--manifest",
        action="append",
        default=[],
        metavar="JSON",
        help="segmentation manifest for the matching --source (repeatable)",
    )
    parser.add_argument(
        "--select",
        action="append",
        default=[],
        type=_parse_selection,
        metavar="SPEC",
        help="top:<n> or ids:<comma list> for the matching --source (default top:1)",
    )
    parser.add_argument(
        "--background",
        action="append",
        default=[],
        metavar="PATH",
        help="still image, frame directory, or raw file; defines the output canvas",
    )
    parser.add_argument(
        "--out",
        action="append",
        default=[],
        metavar="PATH",
        help="output directory, single image (.png/.ppm), raw file, or - for raw stdout",
    )
    parser.add_argument(
        "--resize",
        default=("stretch", (0, 0, 0)),
        type=_parse_resize,
        metavar="MODE",
        help="stretch (default) or letterbox[:RRGGBB pad color]",
    )
    parser.add_argument(
        "--filter",
        default="bilinear",
        choices=("bilinear", "nearest"),
        help="image resampling filter (masks always use nearest)",
    )
    parser.add_argument(
        "--workers",
        type=_positive_int,
        default=os.cpu_count() or 1,
        metavar="N",
        help="parallel frame workers (default: logical CPU count)",
    )
    parser.add_argument(
        "--score-threshold",
        type=_score,
        default=0.5,
        metavar="F",
        help="drop detections scoring below this (default 0.5)",
    )
    parser.add_argument(
        "--exhaustion",
        choices=("drop", "freeze"),
        default="drop",
        help="what an exhausted source shows: nothing (drop) or its last frame (freeze)",
    )
    parser.add_argument(
        "--feather",
        type=_nonnegative_int,
        default=0,
        metavar="PX",
        help="soften mask edges over this radius (default 0, hard edges)",
    )
    parser.add_argument(
        "--raw-in",
        type=_parse_raw_geometry,
        default=None,
        metavar="WxH@FPS",
        help="geometry of raw input files",
    )
    parser.add_argument(
        "--raw-out",
        type=_parse_raw_geometry,
        default=None,
        metavar="WxH@FPS",
        help="geometry of the raw output stream",
    )
    parser.add_argument(
        "--lenient",
        action="store_true",
        help="ignore unknown manifest fields instead of rejecting them",
    )
    parser.add_argument(
        "--emit-selection",
        default=None,
        metavar="PATH",
        help="write the per-frame selected instance ids as JSON",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress details")
    ns = parser.parse_args(argv)

    if not ns.source:
        parser.error("at least one --source is required")
    if len(ns.manifest) != len(ns.source):
        parser.error(
            f"{len(ns.source)} --source but {len(ns.manifest)} --manifest; "
            "each source needs exactly one manifest"
        )
    if len(ns.select) > len(ns.source):
        parser.error(
            f"{len(ns.select)} --select but only {len(ns.source)} --source; "
            "each --select applies to the matching --source"
        )
    selections = tuple(ns.select) + (TopN(1),) * (len(ns.source) - len(ns.select))
    if len(ns.background) != 1:
        parser.error(f"exactly one --background is required, got {len(ns.background)}")
    if len(ns.out) != 1:
        parser.error(f"exactly one --out is required, got {len(ns.out)}")
    background = ns.background[0]
    out = ns.out[0]

    for path in list(ns.source) + [background]:
        if path == "-":
            parser.error("stdin is not a valid input; raw input must be a seekable file")
    if ns.raw_in is None and any(_is_raw_path(p) for p in list(ns.source) + [background]):
        parser.error("raw input files need --raw-in WxH@FPS")
    if ns.raw_out is None and (out == "-" or _is_raw_path(out)):
        parser.error("raw output needs --raw-out WxH@FPS")

    mode, pad_color = ns.resize
    policy = ResizePolicy(mode=mode, pad_color=pad_color, image_filter=ns.filter)
    return CliConfig(
        sources=tuple(ns.source),
        manifests=tuple(ns.manifest),
        selections=selections,
        background=background,
        out=out,
        resize_policy=policy,
        workers=ns.workers,
        score_threshold=ns.score_threshold,
        exhaustion=ns.exhaustion,
        feather=ns.feather,
        raw_in=ns.raw_in,
        raw_out=ns.raw_out,
        lenient=ns.lenient,
        emit_selection=ns.emit_selection,
        verbose=ns.verbose,
    )


def _open_source(path: str, config: CliConfig, rate: Fraction) -> FrameSource:
    if Path(path).is_dir():
        return FrameDirectorySource(path, frame_rate=rate)
    if _is_raw_path(path):
        assert config.raw_in is not None
        return RawFileSource(
            path, config.raw_in.width, config.raw_in.height, frame_rate=rate
        )
    return StillImageSource(path, frame_rate=rate)


def _open_background(path: str, config: CliConfig) -> RasterImage | FrameSource:
    if Path(path).is_dir():
        return FrameDirectorySource(path)
    if _is_raw_path(path):
        assert config.raw_in is not None
        return RawFileSource(
            path, config.raw_in.width, config.raw_in.height, frame_rate=config.raw_in.rate
        )
    return read_image(path)


def _open_sink(config: CliConfig) -> FrameSink:
    out = config.out
    if out == "-":
        return RawStreamSink(sys.stdout.buffer, close_stream=False)
    if _is_raw_path(out):
        return RawStreamSink(open(out, "wb"), close_stream=True)
    if Path(out).suffix.lower() in _IMAGE_SUFFIXES:
        return SingleImageSink(out)
    return DirectorySink(out)


def _build_job(config: CliConfig) -> CompositeJob:
    sources = []
    for path, manifest_path, selection in zip(
        config.sources, config.manifests, config.selections
    ):
        manifest = load_manifest(
            manifest_path,
            score_threshold=config.score_threshold,
            strict=not config.lenient,
        )
        frames = _open_source(path, config, manifest.frame_rate)
        sources.append(SourceSpec(frames, manifest, selection))

    background = _open_background(config.background, config)
    canvas = (background.width, background.height)
    if config.raw_out is not None and (config.raw_out.width, config.raw_out.height) != canvas:
        raise ExtractError(
            f"--raw-out is {config.raw_out.width}x{config.raw_out.height} but the "
            f"output canvas (background) is {canvas[0]}x{canvas[1]}"
        )

    return CompositeJob(
        sources=tuple(sources),
        background=background,
        output=_open_sink(config),
        resize_policy=config.resize_policy,
        workers=config.workers,
        exhaustion=config.exhaustion,  # type: ignore[arg-type]
        feather=config.feather,
    )


def _write_selection_report(path: str, results: list[tuple[int, tuple[frozenset[int], ...]]]) -> None:
    payload = {
        "frames": [
            {
                "frame_index": index,
                "selected_ids_per_source": [sorted(ids) for ids in per_source],
            }
            for index, per_source in results
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def run(config: CliConfig) -> int:
    """Execute a parsed config; returns the process exit code."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if config.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    sink: FrameSink | None = None
    try:
        job = _build_job(config)
        sink = job.output
        assert sink is not None
        total = job_output_length(job)
        if isinstance(sink, SingleImageSink) and total != 1:
            raise ExtractError(
                f"output {config.out!r} is a single image but the job emits "
                f"{total} frames; use an output directory"
            )
        rate = output_frame_rate(job)
        logger.info("emitting %d frame(s) at %s fps", total, rate)

        selections: list[tuple[int, tuple[frozenset[int], ...]]] = []
        for result in process_sequence(job):
            for message in result.diagnostics:
                logger.warning("%s", message)
            sink.write_frame(result.frame_index, result.image)
            if config.emit_selection is not None:
                selections.append((result.frame_index, result.selected_ids_per_source))
        sink.close()
        if config.emit_selection is not None:
            _write_selection_report(config.emit_selection, selections)
    except (ExtractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(sink, DirectorySink):
            sink.mark_incomplete(str(exc))
        if sink is not None:
            try:
                sink.close()
            except (ExtractError, OSError):
                pass
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> None:
    raise SystemExit(run(parse_args(argv)))


if __name__ == "__main__":
    main()
