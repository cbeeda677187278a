"""Affine motion estimates for one object: RANSAC on flow, template search.

Both estimators return AffineParams anchored at the object's mask
centroid c, i.e. the matrix is T(c + t) . L . T(-c) in frame coordinates.
"""
import logging
import math

import numpy as np
from skimage import transform as tf
from skimage.measure import ransac

from ..configuration.module_configs import FlowConfig
from ..diffcomp.affine import AffineParams, translation_matrix
from ..diffcomp.render import warp_premultiplied
from ..exceptions import DegenerateGeometryError, EmptyMaskError, SingularTransformError
from ..imaging.raster import BinaryMask, RasterImage, mask_area, mask_bbox, mask_centroid
from .field import FlowField

__all__ = ["ransac_affine", "template_init", "template_angles"]

logger = logging.getLogger(__name__)

_WINDOW_MARGIN = 2


def _check_not_collinear(points: np.ndarray) -> None:
    if len(points) < 3:
        raise DegenerateGeometryError(
            f"Need at least 3 correspondences, got {len(points)}")
    centered = points - points.mean(axis=0)
    singular = np.linalg.svd(centered, compute_uv=False)
    if singular[1] <= 1e-9 * max(singular[0], 1.0):
        raise DegenerateGeometryError("All correspondences are collinear")


def ransac_affine(flow: FlowField, mask: BinaryMask,
                  cfg: FlowConfig | None = None) -> AffineParams | None:
    """Robust affine fit to the flow vectors inside a mask.

    Correspondences are (p, p + flow(p)) for the mask pixels, subsampled to
    cfg.ransac_max_points with a seeded generator. The consensus model is
    refit by least squares on its inliers.

    Returns:
        Params anchored at the mask centroid, or None when fewer than
        cfg.ransac_min_inlier_ratio of the points agree (no consensus).

    Raises:
        DegenerateGeometryError: If the mask has fewer than 3 pixels or they
            are collinear.
    """
    cfg = cfg or FlowConfig()
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    src = np.column_stack([xs, ys]).astype(np.float64)
    _check_not_collinear(src)
    rng = np.random.default_rng(cfg.seed)
    if len(src) > cfg.ransac_max_points:
        keep = np.sort(rng.choice(len(src), cfg.ransac_max_points, replace=False))
        src = src[keep]
    dst = src + flow[src[:, 1].astype(int), src[:, 0].astype(int)]

    model, inliers = ransac((src, dst), tf.AffineTransform, min_samples=3,
                            residual_threshold=cfg.ransac_residual,
                            max_trials=cfg.ransac_iters, rng=rng)
    if model is None or inliers is None:
        logger.debug("ransac_affine: no model over %d points", len(src))
        return None
    ratio = float(np.count_nonzero(inliers)) / len(src)
    if ratio < cfg.ransac_min_inlier_ratio:
        logger.debug("ransac_affine: inlier ratio %.3f below %.3f",
                     ratio, cfg.ransac_min_inlier_ratio)
        return None
    anchor = mask_centroid(mask)
    try:
        return AffineParams.from_matrix(model.params, anchor, anchor)
    except SingularTransformError:
        logger.debug("ransac_affine: consensus model is singular or mirrored")
        return None


def template_angles(step_deg: float = 1.0) -> list[float]:
    """Angles in degrees over [-180, 180), ordered 0, +s, -s, +2s, -2s, ..."""
    count = int(round(360.0 / step_deg))
    angles = [0.0]
    for k in range(1, count // 2 + 1):
        angles.append(k * step_deg)
        angles.append(-k * step_deg)
    return [a for a in angles if -180.0 <= a < 180.0][:count]


def _extents(points: np.ndarray) -> np.ndarray:
    return points.max(axis=0) - points.min(axis=0) + 1.0


def template_init(obj_img: RasterImage, obj_mask: BinaryMask,
                  target_mask: BinaryMask, target_img: RasterImage,
                  cfg: FlowConfig | None = None) -> AffineParams:
    """Exhaustive rotation search aligning an object to a target region.

    For every angle the object is rotated, uniformly scaled so its extents
    match the target's (measured in the rotated frame) and moved so the
    centroids coincide. The masked RGBA L2 error picks the angle; the
    anisotropic extent ratio at that angle is kept if it does not worsen
    the error. Ties go to the smaller rotation.

    Returns:
        Params anchored at the object centroid, mapping object image
        coordinates to target image coordinates.

    Raises:
        EmptyMaskError: If either mask is empty.
    """
    cfg = cfg or FlowConfig()
    obj_mask = np.asarray(obj_mask, dtype=bool)
    target_mask = np.asarray(target_mask, dtype=bool)
    if mask_area(obj_mask) == 0 or mask_area(target_mask) == 0:
        raise EmptyMaskError("template_init needs nonempty object and target masks")
    c_obj = mask_centroid(obj_mask)
    c_tgt = mask_centroid(target_mask)
    shift = c_tgt - c_obj

    ox0, oy0, ox1, oy1 = mask_bbox(obj_mask)
    crop = np.concatenate([obj_img[oy0:oy1 + 1, ox0:ox1 + 1, :3],
                           obj_mask[oy0:oy1 + 1, ox0:ox1 + 1, None]], axis=-1)
    crop = crop.astype(np.float64)
    from_crop = translation_matrix(ox0, oy0)

    height, width = target_mask.shape
    tx0, ty0, tx1, ty1 = mask_bbox(target_mask)
    wx0, wy0 = max(0, tx0 - _WINDOW_MARGIN), max(0, ty0 - _WINDOW_MARGIN)
    wx1, wy1 = min(width, tx1 + _WINDOW_MARGIN + 1), min(height, ty1 + _WINDOW_MARGIN + 1)
    window = (wy1 - wy0, wx1 - wx0)
    to_window = translation_matrix(-wx0, -wy0)
    alpha = target_mask[wy0:wy1, wx0:wx1, None].astype(np.float64)
    reference = np.concatenate([target_img[wy0:wy1, wx0:wx1, :3] * alpha, alpha], axis=-1)

    ys, xs = np.nonzero(obj_mask)
    obj_extent = _extents(np.column_stack([xs, ys]) - c_obj)
    ys, xs = np.nonzero(target_mask)
    tgt_points = np.column_stack([xs, ys]) - c_tgt

    def extent_ratio(theta: float) -> np.ndarray:
        c, s = math.cos(theta), math.sin(theta)
        unrotated = tgt_points @ np.array([[c, -s], [s, c]])
        return _extents(unrotated) / obj_extent

    def params_for(theta: float, sx: float, sy: float) -> AffineParams:
        return AffineParams(tx=shift[0], ty=shift[1], theta=theta, sx=sx, sy=sy)

    def error(params: AffineParams) -> float:
        m = to_window @ params.matrix(c_obj, c_obj) @ from_crop
        warped = warp_premultiplied(crop, m, window)
        support = (warped[..., 3] > 0) | (alpha[..., 0] > 0)
        return float(((warped - reference) ** 2).sum(axis=-1)[support].mean())

    best_params, best_error = None, math.inf
    for degrees in template_angles(cfg.template_step_deg):
        theta = math.radians(degrees)
        s = float(np.sqrt(np.prod(extent_ratio(theta))))
        candidate = params_for(theta, s, s)
        err = error(candidate)
        if err < best_error - 1e-12:
            best_params, best_error = candidate, err

    ratio = extent_ratio(best_params.theta)
    anisotropic = params_for(best_params.theta, float(ratio[0]), float(ratio[1]))
    if error(anisotropic) <= best_error + 1e-12:
        best_params = anisotropic
    logger.debug("template_init: theta=%.1f deg, error %.5g",
                 math.degrees(best_params.theta), best_error)
    return best_params
