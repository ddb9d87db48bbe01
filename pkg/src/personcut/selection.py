"""Choosing which persons to extract from a frame.

Person detections are ranked by bounding-box area, largest first, and either
the top n or an explicit id list is taken. Ties in area break by ascending
instance id so the result is deterministic for any input order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .core import Detection, bbox_area
from .errors import SelectionError
from .manifest import FrameSegmentation

__all__ = [
    "TopN",
    "ExplicitIds",
    "SelectionSpec",
    "RankedPerson",
    "filter_persons",
    "rank_by_area",
    "select",
]

PERSON_CLASS_NAME = "person"


@dataclass(frozen=True)
class TopN:
    """Take the n largest persons by box area."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"top-n selection needs n >= 1, got {self.n}")


@dataclass(frozen=True)
class ExplicitIds:
    """Take exactly these instance ids; every id must name a person in the frame."""

    ids: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", frozenset(self.ids))
        if not self.ids:
            raise ValueError("explicit-id selection needs at least one id")


SelectionSpec = TopN | ExplicitIds


@dataclass(frozen=True)
class RankedPerson:
    instance_id: int
    area: int
    rank: int


def filter_persons(
    frame: FrameSegmentation, category_table: Mapping[int, str]
) -> list[Detection]:
    """Detections whose class maps to "person", in their original order."""
    person_ids = {cid for cid, name in category_table.items() if name == PERSON_CLASS_NAME}
    return [d for d in frame.detections if d.class_id in person_ids]


def rank_by_area(persons: Sequence[Detection]) -> list[RankedPerson]:
    """Sort persons by box area, largest first; equal areas order by ascending id."""
    ordered = sorted(persons, key=lambda d: (-bbox_area(d.bbox), d.instance_id))
    return [
        RankedPerson(instance_id=d.instance_id, area=bbox_area(d.bbox), rank=r)
        for r, d in enumerate(ordered)
    ]


def select(
    ranked: Sequence[RankedPerson],
    spec: SelectionSpec,
    warn: Callable[[str], None] | None = None,
) -> set[int]:
    """Resolve a selection spec against ranked persons.

    TopN clamps to the number of persons present (emitting a warning through
    ``warn`` when it does); ExplicitIds raises SelectionError if any requested
    id is absent, because silently extracting the wrong people is worse than
    failing.
    """
    if isinstance(spec, TopN):
        if spec.n > len(ranked) and warn is not None:
            warn(
                f"top:{spec.n} requested but only {len(ranked)} person(s) present; "
                f"selecting all {len(ranked)}"
            )
        return {p.instance_id for p in ranked[: spec.n]}
    present = {p.instance_id for p in ranked}
    missing = spec.ids - present
    if missing:
        raise SelectionError(
            "selection names ids that are not persons in this frame: "
            + ", ".join(str(i) for i in sorted(missing))
        )
    return set(spec.ids)
