"""Frame-by-frame object tracking over a whole video."""
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..configuration.pipeline_config import PipelineConfig
from ..exceptions import EmptyMaskError
from ..flow.block_matching import flow_for_video
from ..imaging.raster import FRAME_PATTERN, BinaryMask, RasterImage, write_label_png
from ..segmentation.background import BackgroundModel
from ..segmentation.regions import Region
from ..segmentation.video import segment_video
from .graph import build_mapping_graph
from .mapping import (CandidateMapping, Direction, MappingGraph, extract_candidates,
                      score_candidate, select_mappings)
from .objects import TrackedObject, is_occluded, update_canonical
from .propagation import MappingRecord, TrackingState, propagate_ids

__all__ = ["TrackingResult", "track_frames", "track_video", "label_image_at",
           "write_label_pngs"]

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class TrackingResult:
    """Everything tracking learned about a video.

    Attributes:
        objects: Object id -> tracked object (dead ones included).
        labels: Per frame, object id -> labeled pixels.
        records: Accepted mapping decisions.
        regions: Per-frame segmentation.
        background: Background model used.
        canvas: (width, height).
    """
    objects: dict[int, TrackedObject]
    labels: list[dict[int, BinaryMask]]
    records: list[MappingRecord]
    regions: list[list[Region]] = field(default_factory=list)
    background: BackgroundModel | None = None
    canvas: tuple[int, int] = (0, 0)

    @property
    def num_frames(self) -> int:
        return len(self.labels)


def _score_all(candidates: list[CandidateMapping], graph: MappingGraph,
               target: RasterImage, background: RasterImage) -> None:
    for c in candidates:
        try:
            c.score = score_candidate(c, graph, target, background)
        except EmptyMaskError:
            c.score = math.inf


def _frame_zero(state: TrackingState, frame: RasterImage, regions: Sequence[Region]) -> None:
    state.labels.append({})
    for rank, region in enumerate(regions):
        object_id = state.fresh_id()
        state.objects[object_id] = TrackedObject.from_pixels(object_id, frame,
                                                             region.mask, 0, rank)
        state.labels[0][object_id] = region.mask


def track_frames(frames: Sequence[RasterImage], regions: Sequence[Sequence[Region]],
                 background: BackgroundModel, flows: Sequence[tuple[np.ndarray, np.ndarray]],
                 config: PipelineConfig | None = None) -> TrackingResult:
    """Track objects given per-frame regions and flows.

    Frame 0 regions become objects with fresh ids. For each later frame,
    forward and backward graphs are built, their candidates scored and
    greedily selected, ids propagated and canonical images updated.
    """
    config = config or PipelineConfig()
    cfg = config.tracking
    height, width = np.asarray(frames[0]).shape[:2]
    bg_raster = background.render(width, height)
    state = TrackingState()
    _frame_zero(state, frames[0], regions[0])

    for t in range(1, len(frames)):
        prev_frame, frame = frames[t - 1], frames[t]
        fwd, bwd = flows[t - 1]
        alive = state.alive_at(t - 1)
        object_masks = {o: state.objects[o].timeline[t - 1].mask for o in alive}
        object_z = {o: float(state.objects[o].timeline[t - 1].z) for o in alive}
        region_masks = {r.region_id: r.mask for r in regions[t]}

        forward = build_mapping_graph(Direction.FORWARD, object_masks, prev_frame,
                                      region_masks, frame, bg_raster, (fwd, bwd),
                                      cfg, config.imaging, object_z)
        backward = build_mapping_graph(Direction.BACKWARD, region_masks, frame,
                                       object_masks, prev_frame, bg_raster, (bwd, fwd),
                                       cfg, config.imaging)
        candidates = []
        if forward.placements is not None:
            found = extract_candidates(forward)
            _score_all(found, forward, frame, bg_raster)
            candidates += found
        if backward.placements is not None:
            found = extract_candidates(backward)
            _score_all(found, backward, prev_frame, bg_raster)
            candidates += found

        selected = select_mappings(candidates, cfg.epsilon, objects=alive,
                                   regions=region_masks)
        for c in selected:
            logger.debug("Frame %d: accepted %s %s %s->%s score %.4g", t, c.direction,
                         c.mtype, c.objects, c.regions, c.score)
        propagate_ids(state, selected, regions[t], t, frame, forward, backward)
        for o in state.alive_at(t):
            update_canonical(state.objects[o], frame, t,
                             is_occluded(o, t, state.objects, cfg.occlusion_margin))

    return TrackingResult(objects=state.objects, labels=state.labels,
                          records=state.records, regions=[list(r) for r in regions],
                          background=background, canvas=(width, height))


def track_video(frames: Sequence[RasterImage], config: PipelineConfig | None = None, *,
                background: BackgroundModel | None = None,
                overrides: Mapping[int, np.ndarray] | None = None,
                flo_dir: str | Path | None = None) -> TrackingResult:
    """Segment, compute flow and track a whole video.

    Raises:
        ValueError: If no frames are given.
    """
    if not frames:
        raise ValueError("track_video needs at least one frame")
    config = config or PipelineConfig()
    background, regions = segment_video(frames, config.segmentation, config.imaging,
                                        background, overrides)
    flows = flow_for_video(frames, config.flow, flo_dir)
    result = track_frames(frames, regions, background, flows, config)
    logger.info("Tracked %d frames: %d objects, %d decisions", len(frames),
                len(result.objects), len(result.records))
    return result


def label_image_at(result: TrackingResult, t: int) -> np.ndarray:
    """Integer label image of frame t; overlapping ids resolve to the top z."""
    width, height = result.canvas
    out = np.zeros((height, width), dtype=np.int64)

    def depth(object_id: int) -> int:
        obj = result.objects.get(object_id)
        if obj is None or t not in obj.timeline:
            return -1
        return obj.timeline[t].z

    for object_id in sorted(result.labels[t], key=lambda i: (depth(i), i)):
        out[result.labels[t][object_id]] = object_id
    return out


def write_label_pngs(result: TrackingResult, directory: str | Path) -> list[Path]:
    """Write 16-bit ``frame_%05d.png`` label images, 0 = background."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in range(result.num_frames):
        path = directory / FRAME_PATTERN.format(t)
        write_label_png(path, label_image_at(result, t))
        paths.append(path)
    return paths
