"""From tracked frame-to-frame motion to a motion program.

Tracking stores, per frame, the step that carries an object from the
previous frame. Chaining the steps from the frame its canonical image was
cut from gives every frame's canonical-to-frame transform, which is then
re-fit against the object's labeled pixels and layered.
"""
import logging
import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from ..configuration.pipeline_config import PipelineConfig, worker_count
from ..diffcomp.affine import AffineParams, image_center
from ..diffcomp.placement import PlacementSet, SourceElement
from ..diffcomp.render import VISIBILITY_THRESHOLD, render_placements
from ..diffcomp.soft import dc_loss, dc_optimize
from ..exceptions import SingularTransformError
from ..imaging.raster import BinaryMask, RasterImage, mask_bbox
from ..segmentation.background import BackgroundModel
from ..tracking.objects import TrackedObject
from ..tracking.tracker import TrackingResult
from .model import Keyframe, MotionProgram, ProgramObject
from .render import placements_at

__all__ = ["chain_matrices", "refactor_motion", "refine_motion", "order_layers",
           "build_program"]

logger = logging.getLogger(__name__)


def chain_matrices(steps: Mapping[int, np.ndarray], anchor_frame: int,
                   anchor_matrix: np.ndarray | None = None) -> dict[int, NDArray[np.float64]]:
    """Compose per-frame steps outward from an anchor frame.

    With C at the anchor frame, C[f] = steps[f] . C[f-1] after it and
    C[f] = inv(steps[f+1]) . C[f+1] before it.

    Raises:
        ValueError: If the frames are not contiguous or miss the anchor.
    """
    frames = sorted(steps)
    if not frames or frames != list(range(frames[0], frames[-1] + 1)):
        raise ValueError(f"Step frames must be contiguous, got {frames}")
    if anchor_frame not in steps:
        raise ValueError(f"Anchor frame {anchor_frame} outside {frames[0]}..{frames[-1]}")
    out = {anchor_frame: np.eye(3) if anchor_matrix is None
           else np.asarray(anchor_matrix, dtype=np.float64)}
    for f in range(anchor_frame + 1, frames[-1] + 1):
        out[f] = np.asarray(steps[f]) @ out[f - 1]
    for f in range(anchor_frame - 1, frames[0] - 1, -1):
        out[f] = np.linalg.inv(np.asarray(steps[f + 1])) @ out[f + 1]
    return out


def refactor_motion(obj: TrackedObject, canvas: tuple[int, int]) -> dict[int, AffineParams]:
    """Canonical-to-frame params of a tracked object for every frame it lives.

    Params place the canonical image's center relative to the canvas center.

    Raises:
        SingularTransformError: If a composed transform cannot be decomposed.
    """
    width, height = canvas
    steps = {f: p.params.matrix() for f, p in obj.timeline.items()}
    matrices = chain_matrices(steps, obj.canonical_frame, obj.canonical_matrix())
    src = image_center(obj.canonical.shape)
    dst = ((width - 1) / 2.0, (height - 1) / 2.0)
    return {f: AffineParams.from_matrix(m, src, dst) for f, m in sorted(matrices.items())}


def _refine_frame(canonical: np.ndarray, init: AffineParams, frame: RasterImage,
                  mask: BinaryMask, background: RasterImage, config: PipelineConfig
                  ) -> AffineParams | None:
    height, width = background.shape[:2]
    element = SourceElement(0, canonical, init, 0.0)
    initial = PlacementSet([element], (width, height))
    support = render_placements(initial)[0, ..., 3] > VISIBILITY_THRESHOLD
    labeled = int(np.count_nonzero(mask))
    min_labeled = config.refine.min_visible_fraction * np.count_nonzero(support)
    if not np.any(support) or labeled < min_labeled:
        return None
    dc_cfg = config.dc.with_updates(max_iters=config.refine.max_iters,
                                    reg_weight=config.refine.reg_weight)
    target = np.where(mask[..., None], np.asarray(frame, dtype=np.float64)[..., :3],
                      background)
    x0, y0, x1, y1 = mask_bbox(mask | support)
    margin = dc_cfg.crop_margin
    roi = (x0 - margin, y0 - margin, x1 + 1 + margin, y1 + 1 + margin)
    result = dc_optimize([element], target, dc_cfg, background=background,
                         prev_params=[init], roi=roi)
    refined = result.placements.elements[0].params
    before = dc_loss(initial, target, [init], dc_cfg, background=background)
    after = dc_loss(PlacementSet([SourceElement(0, canonical, refined, 0.0)],
                                 (width, height)),
                    target, [init], dc_cfg, background=background)
    return refined if after < before else None


def refine_motion(obj: ProgramObject, frames: Sequence[RasterImage],
                  masks: Mapping[int, BinaryMask], background: RasterImage,
                  config: PipelineConfig | None = None) -> dict[int, AffineParams]:
    """Re-fit each keyframe with the canonical image as the only source.

    A frame is refit against its labeled pixels (background elsewhere) and
    the result kept only if it lowers the loss; frames with too little
    labeled area keep their initialization.
    """
    config = config or PipelineConfig()
    background = np.asarray(background, dtype=np.float64)[..., :3]
    out = {}
    for f in obj.frames:
        init = obj.keyframes[f].params
        mask = masks.get(f)
        refined = None
        if mask is not None and np.any(mask):
            try:
                refined = _refine_frame(obj.canonical, init, frames[f],
                                        np.asarray(mask, dtype=bool), background, config)
            except SingularTransformError:
                refined = None
        if refined is None:
            logger.debug("Object %d frame %d: refinement rejected", obj.object_id, f)
        out[f] = refined or init
    return out


def _pair_edges(ids: list[int], supports: dict[int, BinaryMask],
                masks: Mapping[int, Mapping[int, BinaryMask]], t: int
                ) -> list[tuple[int, int, int]]:
    """(margin, back, front) for every overlapping pair with a clear winner."""
    edges = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            overlap = supports[a] & supports[b]
            if not np.any(overlap):
                continue
            mask_a = masks.get(a, {}).get(t)
            mask_b = masks.get(b, {}).get(t)
            votes_a = int(np.count_nonzero(overlap & mask_a)) if mask_a is not None else 0
            votes_b = int(np.count_nonzero(overlap & mask_b)) if mask_b is not None else 0
            if votes_a > votes_b:
                edges.append((votes_a - votes_b, b, a))
            elif votes_b > votes_a:
                edges.append((votes_b - votes_a, a, b))
    return edges


def order_layers(program: MotionProgram,
                 masks: Mapping[int, Mapping[int, BinaryMask]]) -> None:
    """Assign per-frame z ranks from overlap evidence.

    For each overlapping pair of rendered objects, the one whose labeled
    pixels dominate the overlap goes in front. Conflicting relations are
    dropped weakest first, and the remaining ones are sorted
    topologically with the previous frame's order, then the current rank,
    then the object id as tie breakers.

    Args:
        program: Program to re-rank in place.
        masks: Object id -> frame -> labeled pixels.
    """
    previous: dict[int, int] = {}
    for t in range(program.num_frames):
        present = program.visible_at(t)
        if not present:
            previous = {}
            continue
        ps = placements_at(program, t)
        layers = render_placements(ps)
        supports = {e.element_id: layers[i, ..., 3] > VISIBILITY_THRESHOLD
                    for i, e in enumerate(ps.elements)}
        ids = [e.element_id for e in ps.elements]
        graph = nx.DiGraph()
        graph.add_nodes_from(ids)
        for _margin, back, front in sorted(_pair_edges(ids, supports, masks, t), reverse=True):
            if not nx.has_path(graph, front, back):
                graph.add_edge(back, front)
        current = {o.object_id: o.keyframes[t].z for o in present}
        key = {i: (previous.get(i, math.inf), current[i], i) for i in ids}
        order = list(nx.lexicographical_topological_sort(graph, key=lambda i: key[i]))
        for rank, object_id in enumerate(order):
            old = program.get(object_id).keyframes[t]
            program.set_keyframe(object_id, Keyframe(t, old.params, rank, old.visible))
        previous = {object_id: rank for rank, object_id in enumerate(order)}


def build_program(result: TrackingResult, frames: Sequence[RasterImage],
                  background: BackgroundModel | None = None,
                  config: PipelineConfig | None = None, fps: float = 24.0) -> MotionProgram:
    """Refactor, refine and layer every tracked object into a program.

    Objects whose motion cannot be decomposed are dropped with a warning.
    """
    config = config or PipelineConfig()
    background = background or result.background
    width, height = result.canvas
    bg_raster = background.render(width, height)

    def build_one(obj: TrackedObject) -> ProgramObject | None:
        try:
            params = refactor_motion(obj, result.canvas)
        except SingularTransformError as e:
            logger.warning("Dropping object %d: %s", obj.object_id, e)
            return None
        keyframes = [Keyframe(f, params[f], obj.timeline[f].z) for f in sorted(params)]
        draft = ProgramObject(obj.object_id, obj.canonical, keyframes)
        if not config.refine.enabled:
            return draft
        masks = {f: p.mask for f, p in obj.timeline.items()}
        refined = refine_motion(draft, frames, masks, bg_raster, config)
        return ProgramObject(obj.object_id, obj.canonical,
                             [Keyframe(f, refined[f], obj.timeline[f].z) for f in sorted(refined)])

    tracked = [result.objects[i] for i in sorted(result.objects)]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        built = [o for o in pool.map(build_one, tracked) if o is not None]
    program = MotionProgram(width=width, height=height, num_frames=len(frames), fps=fps,
                            background=background, objects=built)
    order_layers(program, {o.object_id: {f: p.mask for f, p in o.timeline.items()}
                           for o in tracked})
    program.validate()
    logger.info("Built program: %d objects over %d frames", len(built), len(frames))
    return program
