"""Mapping-graph construction by joint differentiable compositing."""
import logging
from collections.abc import Mapping

import numpy as np
from numpy.typing import NDArray

from ..configuration.module_configs import ImagingConfig, TrackerConfig
from ..diffcomp.affine import AffineParams, image_center
from ..diffcomp.placement import PlacementSet, SourceElement
from ..diffcomp.render import VISIBILITY_THRESHOLD, render_placements, visibility_masks
from ..diffcomp.soft import dc_optimize
from ..exceptions import DegenerateGeometryError, EmptyMaskError, SingularTransformError
from ..flow.coarse import coarse_weight
from ..flow.estimation import ransac_affine, template_init
from ..flow.field import FlowField
from ..imaging.raster import BinaryMask, RasterImage, mask_bbox, mask_centroid
from .mapping import Direction, MappingGraph, coverage_weights, keep_strongest_edges
from .objects import crop_rgba

__all__ = ["initial_motion", "build_mapping_graph"]

logger = logging.getLogger(__name__)


def _similarity(src_mask, src_frame, tgt_mask, tgt_frame, img_cfg) -> float:
    zero = np.zeros(src_mask.shape + (2,))
    cw = coarse_weight(src_mask, src_frame, tgt_mask, tgt_frame, zero, zero, img_cfg)
    return cw.w_shape * cw.w_color


def initial_motion(mask: BinaryMask, flow: FlowField, src_frame: RasterImage,
                   tgt_frame: RasterImage, tgt_masks: Mapping[int, BinaryMask],
                   cfg: TrackerConfig, img_cfg: ImagingConfig | None = None
                   ) -> NDArray[np.float64]:
    """Frame-space motion matrix guess for one source.

    RANSAC on the flow inside the mask first; without consensus, the
    template search against the most similar target, else identity.
    """
    img_cfg = img_cfg or ImagingConfig()
    try:
        params = ransac_affine(flow, mask, cfg.flow)
    except DegenerateGeometryError:
        params = None
    if params is not None:
        anchor = mask_centroid(mask)
        return params.matrix(anchor, anchor)
    logger.warning("No flow consensus for a %d-pixel source", int(np.count_nonzero(mask)))
    if cfg.use_template and tgt_masks:
        scored = sorted(((_similarity(mask, src_frame, m, tgt_frame, img_cfg), -i, i)
                         for i, m in tgt_masks.items() if np.any(m)), reverse=True)
        if scored and scored[0][0] > 0:
            target_id = scored[0][2]
            logger.warning("Falling back to template search against target %d", target_id)
            params = template_init(src_frame, mask, tgt_masks[target_id], tgt_frame, cfg.flow)
            anchor = mask_centroid(mask)
            return params.matrix(anchor, anchor)
    return np.eye(3)


def _roi(masks: list[BinaryMask], margin: int, shape: tuple[int, int]
         ) -> tuple[int, int, int, int]:
    x0, y0, x1, y1 = shape[1], shape[0], 0, 0
    for m in masks:
        if not np.any(m):
            continue
        bx0, by0, bx1, by1 = mask_bbox(m)
        x0, y0 = min(x0, bx0), min(y0, by0)
        x1, y1 = max(x1, bx1 + 1), max(y1, by1 + 1)
    return (max(0, x0 - margin), max(0, y0 - margin),
            min(shape[1], x1 + margin), min(shape[0], y1 + margin))


def build_mapping_graph(direction: Direction,
                        source_masks: Mapping[int, BinaryMask], source_frame: RasterImage,
                        target_masks: Mapping[int, BinaryMask], target_frame: RasterImage,
                        background: RasterImage, flows: tuple[FlowField, FlowField],
                        cfg: TrackerConfig | None = None,
                        img_cfg: ImagingConfig | None = None,
                        source_z: Mapping[int, float] | None = None) -> MappingGraph:
    """Fit all sources jointly onto the target frame and keep the strongest edges.

    Forward graphs use the objects of frame t-1 as sources and the regions
    of frame t as targets; backward graphs swap them.

    Args:
        direction: Graph direction; decides how (source, target) ids map to
            (object, region) edges.
        source_masks: Source id -> mask in source_frame.
        target_masks: Target id -> mask in target_frame.
        background: RGB background raster of the canvas.
        flows: (flow source->target, flow target->source).
        source_z: Initial depths; source order by default.

    Returns:
        The graph; empty when there are no sources or no targets.
    """
    cfg = cfg or TrackerConfig()
    img_cfg = img_cfg or ImagingConfig()
    graph = MappingGraph(direction=direction,
                         target_masks={int(i): np.asarray(m, dtype=bool)
                                       for i, m in target_masks.items()})
    source_ids = sorted(i for i, m in source_masks.items() if np.any(m))
    if not source_ids or not target_masks:
        return graph
    height, width = np.asarray(target_frame).shape[:2]
    canvas_anchor = np.array([(width - 1) / 2.0, (height - 1) / 2.0])
    source_z = source_z or {}
    to_target, to_source = flows

    elements, start_matrices, init_masks = [], {}, []
    for rank, i in enumerate(source_ids):
        mask = np.asarray(source_masks[i], dtype=bool)
        crop, (x0, y0) = crop_rgba(source_frame, mask)
        start = np.array([[1.0, 0.0, x0], [0.0, 1.0, y0], [0.0, 0.0, 1.0]])
        motion = initial_motion(mask, to_target, source_frame, target_frame,
                                target_masks, cfg, img_cfg)
        try:
            params = AffineParams.from_matrix(motion @ start, image_center(crop.shape),
                                              canvas_anchor)
        except SingularTransformError:
            params = AffineParams.from_matrix(start, image_center(crop.shape), canvas_anchor)
        start_matrices[i] = start
        elements.append(SourceElement(i, crop, params, float(source_z.get(i, rank))))
        init_masks.append(mask)

    roi = _roi(init_masks + [np.asarray(m, dtype=bool) for m in target_masks.values()],
               cfg.dc.crop_margin, (height, width))
    result = dc_optimize(elements, np.asarray(target_frame)[..., :3], cfg.dc,
                         background=background, roi=roi)
    ps = result.placements
    graph.placements = ps
    layers = render_placements(ps)
    graph.visibility = visibility_masks(ps, layers)
    for index, e in enumerate(ps.elements):
        graph.motions[e.element_id] = ps.matrix_of(e.element_id) @ np.linalg.inv(
            start_matrices[e.element_id])
        graph.depths[e.element_id] = result.continuous_z[index]
        graph.supports[e.element_id] = layers[index, ..., 3] > VISIBILITY_THRESHOLD

    weights = {}
    for s in source_ids:
        for g, tgt in graph.target_masks.items():
            w = coverage_weights(graph.visibility[s], tgt)
            if w[0] > 0 or w[1] > 0:
                weights[(s, g)] = w
    if cfg.coarse_prune:
        weights = _prune(weights, direction, source_masks, source_frame,
                         graph.target_masks, target_frame, flows, img_cfg)
    graph.edges = keep_strongest_edges(direction, weights)
    logger.debug("%s graph: %d sources, %d targets, %d edges, DC loss %.5g",
                 direction, len(source_ids), len(target_masks), len(graph.edges),
                 result.loss)
    return graph


def _prune(weights, direction, source_masks, source_frame, target_masks,
           target_frame, flows, img_cfg):
    kept = {}
    for (s, g), w in weights.items():
        try:
            cw = coarse_weight(source_masks[s], source_frame, target_masks[g],
                               target_frame, flows[0], flows[1], img_cfg)
        except EmptyMaskError:
            continue
        if cw.w > 0:
            kept[(s, g)] = w
        else:
            logger.debug("%s graph: pruned %d-%d with zero coarse weight", direction, s, g)
    return kept
