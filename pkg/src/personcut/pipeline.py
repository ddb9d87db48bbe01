"""Per-frame orchestration of selection, resizing, and compositing.

process_frame runs the three stages for one output frame: pick persons per
source, resize each source and the union of its selected masks to the
background's dimensions, then composite the layers in source order.

process_sequence maps that over a whole job. Frames are independent, so they
are dispatched to a small thread pool as per-frame work units; numpy does the
pixel work with the interpreter lock released. A bounded reorder window (at
most workers + buffer_depth frames in flight) restores index order at the
consumer, and every work unit is a pure function of the job and the frame
index, so the emitted stream is byte-identical for any worker count.

When inputs differ in length the output has the length of the longest one.
An exhausted source contributes nothing to later frames ("drop", the
default) or repeats its final frame and mask ("freeze"). A background
sequence shorter than the output always repeats its last frame, since every
output frame needs a background.
"""

from __future__ import annotations

import logging
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Literal, Mapping, Sequence

from .compositing import ResizePolicy, composite_layers, resize_image, resize_mask
from .core import BinaryMask, RasterImage, mask_union
from .errors import ExtractError, FrameProcessError
from .frameio import FrameSink, FrameSource
from .manifest import FrameSegmentation, SequenceManifest, validate_against_frames
from .selection import SelectionSpec, filter_persons, rank_by_area, select

__all__ = [
    "SourceSpec",
    "CompositeJob",
    "SourceFrame",
    "FrameResult",
    "process_frame",
    "output_length",
    "job_output_length",
    "output_frame_rate",
    "process_sequence",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourceSpec:
    """One input: its frames, their segmentation, and what to select."""

    frames: FrameSource
    manifest: SequenceManifest
    selection: SelectionSpec


@dataclass(frozen=True)
class CompositeJob:
    """Everything needed to render one output sequence."""

    sources: tuple[SourceSpec, ...]
    background: RasterImage | FrameSource
    output: FrameSink | None = None
    resize_policy: ResizePolicy = field(default_factory=ResizePolicy)
    workers: int = 1
    exhaustion: Literal["drop", "freeze"] = "drop"
    feather: int = 0
    buffer_depth: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.sources:
            raise ValueError("a job needs at least one source")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.exhaustion not in ("drop", "freeze"):
            raise ValueError(f"unknown exhaustion policy {self.exhaustion!r}")
        if self.feather < 0:
            raise ValueError(f"feather must be >= 0, got {self.feather}")
        if self.buffer_depth < 0:
            raise ValueError(f"buffer_depth must be >= 0, got {self.buffer_depth}")


@dataclass(frozen=True)
class SourceFrame:
    """One source's contribution to one output frame; absent when exhausted."""

    image: RasterImage | None
    segmentation: FrameSegmentation | None
    selection: SelectionSpec
    category_table: Mapping[int, str]


@dataclass(frozen=True)
class FrameResult:
    frame_index: int
    image: RasterImage
    selected_ids_per_source: tuple[frozenset[int], ...]
    diagnostics: tuple[str, ...]


def process_frame(
    background_frame: RasterImage,
    per_source: Sequence[SourceFrame],
    policy: ResizePolicy,
    *,
    feather: int = 0,
    frame_index: int = 0,
) -> FrameResult:
    """Render one output frame from its background and per-source inputs."""
    layers: list[tuple[RasterImage, BinaryMask]] = []
    selected: list[frozenset[int]] = []
    diagnostics: list[str] = []
    for si, sf in enumerate(per_source):
        if sf.image is None and sf.segmentation is None:
            selected.append(frozenset())
            continue
        if sf.image is None or sf.segmentation is None:
            raise ValueError(
                f"source {si}: a present frame needs both image and segmentation"
            )
        try:
            persons = filter_persons(sf.segmentation, sf.category_table)
            ranked = rank_by_area(persons)
            prefix = f"frame {frame_index}, source {si}: "
            ids = frozenset(
                select(
                    ranked,
                    sf.selection,
                    warn=lambda msg, p=prefix: diagnostics.append(p + msg),
                )
            )
            selected.append(ids)
            if not ids:
                continue
            masks = [d.mask for d in sf.segmentation.detections if d.instance_id in ids]
            union = mask_union(masks)
            layers.append(
                (
                    resize_image(
                        sf.image, background_frame.width, background_frame.height, policy
                    ),
                    resize_mask(
                        union, background_frame.width, background_frame.height, policy
                    ),
                )
            )
        except ExtractError as exc:
            raise FrameProcessError(
                f"frame {frame_index}, source {si}: {exc}", frame_index, si
            ) from exc
    try:
        image = composite_layers(background_frame, layers, feather=feather)
    except ExtractError as exc:
        raise FrameProcessError(f"frame {frame_index}: {exc}", frame_index) from exc
    return FrameResult(frame_index, image, tuple(selected), tuple(diagnostics))


def output_length(
    source_lengths: Sequence[int], background_length: int | None = None
) -> int:
    """Length of the output: the longest input governs.

    A still background contributes no length (pass None); a background
    sequence counts like any other input.
    """
    lengths = [int(n) for n in source_lengths]
    if not lengths or max(lengths) < 1:
        raise ExtractError("all sources are empty, nothing to process")
    longest = max(lengths)
    if background_length is not None:
        longest = max(longest, int(background_length))
    return longest


# A frame reference a worker can resolve: either the pixels themselves
# (prefetched from a sequential source) or (source, index) to read on demand.
_FrameRef = RasterImage | tuple[FrameSource, int]


class _SequentialReader:
    """In-order reader over a non-seekable source, caching the last frame.

    fetch must be called with non-decreasing indices; repeats of the most
    recent index are served from the cache (exhaustion policies re-request
    the final frame).
    """

    def __init__(self, source: FrameSource):
        self._source = source
        self._next = 0
        self._last: RasterImage | None = None

    def fetch(self, index: int) -> RasterImage:
        if index < self._next:
            if index == self._next - 1 and self._last is not None:
                return self._last
            raise RuntimeError(f"sequential source cannot seek back to frame {index}")
        while self._next <= index:
            self._last = self._source.get_frame(self._next)
            self._next += 1
        assert self._last is not None
        return self._last


class _JobPlan:
    """Validated job with pure per-frame work units.

    work_item(i) performs any strictly-ordered reads (dispatcher side, in
    ascending i); compute(item) is thread-safe and does everything else.
    """

    def __init__(self, job: CompositeJob):
        self.job = job
        for si, spec in enumerate(job.sources):
            report = validate_against_frames(
                spec.manifest, spec.frames.frame_count, spec.frames.width, spec.frames.height
            )
            if not report.ok:
                raise ExtractError(f"source {si}: " + "; ".join(report.mismatches))

        if isinstance(job.background, RasterImage):
            self._bg_still: RasterImage | None = job.background
            self._bg_seq: FrameSource | None = None
            bg_length = None
        else:
            self._bg_still = None
            self._bg_seq = job.background
            if job.background.frame_count < 1:
                raise ExtractError("background sequence has no frames")
            bg_length = job.background.frame_count
        self.length = output_length(
            [spec.frames.frame_count for spec in job.sources], bg_length
        )

        self._readers: dict[int, _SequentialReader] = {}
        for si, spec in enumerate(job.sources):
            if not spec.frames.random_access:
                self._readers[si] = _SequentialReader(spec.frames)
        self._bg_reader = (
            _SequentialReader(self._bg_seq)
            if self._bg_seq is not None and not self._bg_seq.random_access
            else None
        )
        self._warn_rate_mismatch()

    def _warn_rate_mismatch(self) -> None:
        declared = {spec.manifest.frame_rate for spec in self.job.sources}
        if self._bg_seq is not None and self._bg_seq.frame_rate is not None:
            declared.add(self._bg_seq.frame_rate)
        if len(declared) > 1:
            rates = ", ".join(str(r) for r in sorted(declared))
            logger.warning(
                "input frame rates differ (%s); frames are paired by index, "
                "not resampled",
                rates,
            )

    def _source_index(self, spec: SourceSpec, i: int) -> int | None:
        n = spec.frames.frame_count
        if i < n:
            return i
        if self.job.exhaustion == "freeze" and n > 0:
            return n - 1
        return None

    def work_item(self, i: int):
        if self._bg_still is not None:
            bg: _FrameRef = self._bg_still
        else:
            assert self._bg_seq is not None
            j = min(i, self._bg_seq.frame_count - 1)
            if self._bg_reader is not None:
                try:
                    bg = self._bg_reader.fetch(j)
                except ExtractError as exc:
                    raise FrameProcessError(
                        f"frame {i}, background: {exc}", i
                    ) from exc
            else:
                bg = (self._bg_seq, j)

        slots: list[tuple[_FrameRef | None, int | None]] = []
        for si, spec in enumerate(self.job.sources):
            j = self._source_index(spec, i)
            if j is None:
                slots.append((None, None))
            elif si in self._readers:
                try:
                    slots.append((self._readers[si].fetch(j), j))
                except ExtractError as exc:
                    raise FrameProcessError(
                        f"frame {i}, source {si}: {exc}", i, si
                    ) from exc
            else:
                slots.append(((spec.frames, j), j))
        return i, bg, tuple(slots)

    def compute(self, item) -> FrameResult:
        i, bg_ref, slots = item
        bg = self._resolve(bg_ref, i, None)
        per_source = []
        for si, (ref, j) in enumerate(slots):
            if ref is None:
                image = None
                segmentation = None
            else:
                image = self._resolve(ref, i, si)
                segmentation = self.job.sources[si].manifest.frames[j]
            per_source.append(
                SourceFrame(
                    image,
                    segmentation,
                    self.job.sources[si].selection,
                    self.job.sources[si].manifest.category_table,
                )
            )
        return process_frame(
            bg,
            per_source,
            self.job.resize_policy,
            feather=self.job.feather,
            frame_index=i,
        )

    def _resolve(self, ref: _FrameRef, i: int, si: int | None) -> RasterImage:
        if isinstance(ref, RasterImage):
            return ref
        source, j = ref
        try:
            return source.get_frame(j)
        except ExtractError as exc:
            where = "background" if si is None else f"source {si}"
            raise FrameProcessError(f"frame {i}, {where}: {exc}", i, si) from exc


def job_output_length(job: CompositeJob) -> int:
    """Number of frames the job will emit (also validates the job)."""
    return _JobPlan(job).length


def output_frame_rate(job: CompositeJob) -> Fraction | None:
    """Declared rate of the output: the background sequence's, else the first source's."""
    background = job.background
    if not isinstance(background, RasterImage):
        if background.frame_rate is not None:
            return background.frame_rate
        logger.warning(
            "background sequence declares no frame rate; falling back to the "
            "first source's rate"
        )
    return job.sources[0].manifest.frame_rate


def process_sequence(job: CompositeJob) -> Iterator[FrameResult]:
    """Yield FrameResults for every output frame, in frame_index order.

    Byte-identical output for any job.workers value; at most
    workers + buffer_depth frames are in flight at once.
    """
    plan = _JobPlan(job)
    if job.workers == 1:
        for i in range(plan.length):
            yield plan.compute(plan.work_item(i))
        return

    window = job.workers + job.buffer_depth
    futures: dict[int, Future[FrameResult]] = {}
    with ThreadPoolExecutor(max_workers=job.workers) as pool:
        try:
            next_submit = 0
            for next_emit in range(plan.length):
                while next_submit < plan.length and len(futures) < window:
                    futures[next_submit] = pool.submit(plan.compute, plan.work_item(next_submit))
                    next_submit += 1
                yield futures.pop(next_emit).result()
        finally:
            for future in futures.values():
                future.cancel()
