"""ID propagation per mapping type and the mapping-decision log."""
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..diffcomp.affine import AffineParams
from ..exceptions import FrameIOError, InconsistentSelectionError, ParseError
from ..imaging.raster import BinaryMask, RasterImage, mask_area
from ..segmentation.regions import Region
from .mapping import CandidateMapping, Direction, MappingGraph, MappingType
from .objects import Placement, TrackedObject

__all__ = [
    "MappingRecord",
    "TrackingState",
    "propagate_ids",
    "write_decision_log",
    "read_decision_log",
    "records_at",
]

logger = logging.getLogger(__name__)

_LOG_HEADER = "# frame\ttype\tdirection\tobjects\tregions\tresults\tscore"


@dataclass(frozen=True)
class MappingRecord:
    """One accepted mapping at frame t.

    Attributes:
        t: Frame of the regions.
        mtype: Mapping type.
        direction: Graph the mapping came from.
        objects: Object ids at frame t-1.
        regions: Region ids at frame t.
        results: Object ids carrying the regions at frame t.
        score: Visibility loss of the mapping.
    """
    t: int
    mtype: MappingType
    direction: Direction = Direction.FORWARD
    objects: tuple[int, ...] = ()
    regions: tuple[int, ...] = ()
    results: tuple[int, ...] = ()
    score: float = 0.0


@dataclass(eq=False)
class TrackingState:
    """Mutable object table and per-frame label stacks during tracking.

    Attributes:
        objects: Object id -> tracked object.
        labels: Per frame, object id -> labeled pixels (masks may overlap).
        records: Accepted mappings in decision order.
        next_id: Next fresh object id.
    """
    objects: dict[int, TrackedObject] = field(default_factory=dict)
    labels: list[dict[int, BinaryMask]] = field(default_factory=list)
    records: list[MappingRecord] = field(default_factory=list)
    next_id: int = 1

    def fresh_id(self) -> int:
        object_id = self.next_id
        self.next_id += 1
        return object_id

    def alive_at(self, t: int) -> list[int]:
        return sorted(i for i, o in self.objects.items() if o.alive and t in o.timeline)


def _check_conflict_free(selected: Sequence[CandidateMapping]) -> None:
    seen_objects: set[int] = set()
    seen_regions: set[int] = set()
    for c in selected:
        if seen_objects & set(c.objects) or seen_regions & set(c.regions):
            raise InconsistentSelectionError(
                f"Mapping {c.objects}->{c.regions} shares an element with another")
        seen_objects |= set(c.objects)
        seen_regions |= set(c.regions)


def _union(masks: Iterable[BinaryMask], shape: tuple[int, int]) -> BinaryMask:
    out = np.zeros(shape, dtype=bool)
    for m in masks:
        out |= m
    return out


def _step(graph: MappingGraph | None, source_id: int, invert: bool) -> AffineParams:
    motion = graph.motions[source_id]
    if invert:
        motion = np.linalg.inv(motion)
    return AffineParams.from_matrix(motion)


def _relabel_history(state: TrackingState, old_ids: Iterable[int], new_id: int, t: int) -> None:
    for f in range(t):
        frame_labels = state.labels[f]
        for old in old_ids:
            if old in frame_labels:
                mask = frame_labels.pop(old)
                frame_labels[new_id] = frame_labels.get(new_id, False) | mask


def _absorb_history(state: TrackingState, new_id: int, constituents: Iterable[int],
                    step: AffineParams, t: int) -> None:
    """Fold the constituents' placements before t into the merged object.

    Each earlier frame takes the union of the constituents' masks and the
    front-most rank among them. Its step comes from the largest constituent
    that was already present in the frame before; the step into t is the
    merge region's own motion.
    """
    merged = state.objects[new_id]
    members = [state.objects.pop(o) for o in sorted(constituents)]
    frames = sorted({f for m in members for f in m.timeline if f < t})
    history: dict[int, Placement] = {}
    for f in frames:
        present = [m for m in members if f in m.timeline]
        mask = _union((m.timeline[f].mask for m in present), merged.timeline[t].mask.shape)
        carried = [m for m in present if f - 1 in m.timeline] or present
        lead = max(carried, key=lambda m: (mask_area(m.timeline[f].mask), -m.object_id))
        params = lead.timeline[f].params if f > frames[0] else AffineParams()
        history[f] = Placement(params, max(m.timeline[f].z for m in present), mask)
    now = merged.timeline[t]
    history[t] = Placement(step if frames else AffineParams(), now.z, now.mask)
    merged.timeline = history
    for m in members:
        merged.parts.update(m.parts)
        merged.parts[m.object_id] = {f: p.mask for f, p in m.timeline.items()}
    logger.debug("Frame %d: objects %s merged into %d, history from frame %d",
                 t, [m.object_id for m in members], new_id, merged.first_frame)


def propagate_ids(state: TrackingState, selected: Sequence[CandidateMapping],
                  regions: Sequence[Region], t: int, frame: RasterImage,
                  forward: MappingGraph | None = None,
                  backward: MappingGraph | None = None) -> list[MappingRecord]:
    """Apply accepted mappings to the object table and the frame-t labels.

    Depth ranks at t follow the forward fit's continuous depth for objects
    that continue (previous rank otherwise); new objects go on top in
    region order.

    Raises:
        InconsistentSelectionError: If two mappings share an object or region.
    """
    _check_conflict_free(selected)
    shape = np.asarray(frame).shape[:2]
    by_id = {r.region_id: r for r in regions}
    while len(state.labels) <= t:
        state.labels.append({})
    continuing: dict[int, tuple[AffineParams, BinaryMask]] = {}
    fresh: list[tuple[int, BinaryMask]] = []
    merges: list[tuple[int, tuple[int, ...], AffineParams]] = []
    records = []

    for c in selected:
        region_masks = [by_id[r].mask for r in c.regions]
        results: list[int] = []
        if c.mtype in (MappingType.ONE_TO_ONE, MappingType.ONE_TO_MANY_NO_SPLIT):
            (o,) = c.objects
            if c.direction is Direction.FORWARD:
                step = _step(forward, o, invert=False)
            else:
                step = _step(backward, c.regions[0], invert=True)
            continuing[o] = (step, _union(region_masks, shape))
            results = [o]
        elif c.mtype is MappingType.MANY_TO_ONE_NO_MERGE:
            region_mask = region_masks[0]
            claimed = np.zeros(shape, dtype=bool)
            for o in c.objects:
                own = forward.supports[o] & region_mask
                claimed |= own
                if np.any(own):
                    continuing[o] = (_step(forward, o, invert=False), own)
                    results.append(o)
                else:
                    state.objects[o].alive = False
            leftover = region_mask & ~claimed
            if np.any(leftover) and results:
                step, mask = continuing[results[0]]
                continuing[results[0]] = (step, mask | leftover)
        elif c.mtype is MappingType.MANY_TO_ONE_MERGE:
            new_id = state.fresh_id()
            _relabel_history(state, c.objects, new_id, t)
            step = (_step(backward, c.regions[0], invert=True)
                    if backward is not None and c.regions[0] in backward.motions
                    else AffineParams())
            merges.append((new_id, c.objects, step))
            fresh.append((new_id, region_masks[0]))
            results = [new_id]
        elif c.mtype in (MappingType.ONE_TO_MANY_SPLIT, MappingType.APPEAR):
            for o in c.objects:
                state.objects[o].alive = False
            for mask in region_masks:
                new_id = state.fresh_id()
                fresh.append((new_id, mask))
                results.append(new_id)
        elif c.mtype is MappingType.DISAPPEAR:
            for o in c.objects:
                state.objects[o].alive = False
                logger.debug("Frame %d: object %d disappeared", t, o)
        records.append(MappingRecord(t=t, mtype=c.mtype, direction=c.direction,
                                     objects=c.objects, regions=c.regions,
                                     results=tuple(results), score=c.score))

    depth = dict(forward.depths) if forward is not None else {}
    existing = sorted(continuing, key=lambda o: (
        depth.get(o, state.objects[o].timeline[t - 1].z), o))
    rank = 0
    for o in existing:
        step, mask = continuing[o]
        state.objects[o].record(t, step, rank, mask)
        state.labels[t][o] = mask
        rank += 1
    for new_id, mask in fresh:
        state.objects[new_id] = TrackedObject.from_pixels(new_id, frame, mask, t, rank)
        state.labels[t][new_id] = mask
        rank += 1
    for new_id, constituents, step in merges:
        _absorb_history(state, new_id, constituents, step, t)
    state.records.extend(records)
    logger.info("Frame %d: %d continuing, %d new objects", t, len(existing), len(fresh))
    return records


def write_decision_log(path: str | Path, records: Sequence[MappingRecord]) -> None:
    """One tab-separated line per accepted mapping."""
    def ids(values: Sequence[int]) -> str:
        return ",".join(str(v) for v in values) or "-"

    lines = [_LOG_HEADER]
    for r in records:
        lines.append(f"{r.t}\t{r.mtype}\t{r.direction}\t{ids(r.objects)}\t"
                     f"{ids(r.regions)}\t{ids(r.results)}\t{r.score!r}")
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise FrameIOError(f"Cannot write decision log {path}: {e}") from e


def read_decision_log(path: str | Path) -> list[MappingRecord]:
    """Parse a log written by write_decision_log.

    Raises:
        FrameIOError: If the file cannot be read.
        ParseError: On a malformed line, with its line number.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FrameIOError(f"Cannot read decision log {path}: {e}") from e

    def ids(field_text: str) -> tuple[int, ...]:
        return () if field_text == "-" else tuple(int(v) for v in field_text.split(","))

    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 7:
            raise ParseError(f"Expected 7 fields, got {len(parts)}", line=number)
        try:
            records.append(MappingRecord(
                t=int(parts[0]), mtype=MappingType(parts[1]),
                direction=Direction(parts[2]), objects=ids(parts[3]),
                regions=ids(parts[4]), results=ids(parts[5]), score=float(parts[6])))
        except ValueError as e:
            raise ParseError(f"Malformed decision: {e}", line=number) from e
    return records


def records_at(records: Iterable[MappingRecord], t: int) -> list[MappingRecord]:
    return [r for r in records if r.t == t]
