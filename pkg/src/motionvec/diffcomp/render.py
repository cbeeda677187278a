"""Hard (discrete-depth) rendering of placement sets with numpy.

Sources are padded with one transparent pixel and resampled bilinearly
in premultiplied form, so edges fade to transparent instead of clamping.
"""
from collections.abc import Sequence
from typing import Final

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from ..exceptions import (DimensionMismatchError, SingularTransformError,
                          UnknownElementError)
from ..imaging.raster import BinaryMask, RasterImage
from .affine import MIN_DETERMINANT, AffineParams, image_center
from .placement import PlacementSet, depth_order

__all__ = [
    "VISIBILITY_THRESHOLD",
    "warp_premultiplied",
    "apply_affine",
    "render_placements",
    "composite_hard",
    "composite_premultiplied",
    "visibility_mask",
    "visibility_masks",
]

VISIBILITY_THRESHOLD: Final[float] = 0.5


def warp_premultiplied(image: np.ndarray, matrix: np.ndarray,
                       out_shape: Sequence[int]) -> NDArray[np.float64]:
    """Resample an RGBA image through a source-to-output matrix.

    Args:
        image: (h, w, 4) straight-alpha RGBA.
        matrix: 3x3 source-to-output affine matrix.
        out_shape: (H, W) of the output.

    Returns:
        (H, W, 4) premultiplied RGBA.

    Raises:
        SingularTransformError: If |det| of the linear part is < 1e-9.
    """
    det = float(np.linalg.det(matrix[:2, :2]))
    if abs(det) < MIN_DETERMINANT:
        raise SingularTransformError(f"Transform determinant {det:.3g} is singular")
    inv = np.linalg.inv(matrix)
    height, width = int(out_shape[0]), int(out_shape[1])
    premult = np.concatenate([image[..., :3] * image[..., 3:4], image[..., 3:4]], axis=-1)
    padded = np.pad(premult, ((1, 1), (1, 1), (0, 0)))
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    u = inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2] + 1.0
    v = inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2] + 1.0
    out = np.empty((height, width, 4))
    for c in range(4):
        out[..., c] = ndimage.map_coordinates(padded[..., c], [v, u], order=1,
                                              mode="constant", cval=0.0)
    out[..., 3] = np.clip(out[..., 3], 0.0, 1.0)
    out[..., :3] = np.clip(out[..., :3], 0.0, out[..., 3:4])
    return out


def _unpremultiply(premult: np.ndarray) -> NDArray[np.float64]:
    alpha = premult[..., 3:4]
    color = np.divide(premult[..., :3], alpha, out=np.zeros_like(premult[..., :3]),
                      where=alpha > 0)
    return np.concatenate([np.clip(color, 0.0, 1.0), alpha], axis=-1)


def apply_affine(src: np.ndarray, params: AffineParams,
                 canvas: tuple[int, int]) -> RasterImage:
    """Place an RGBA (or RGB, taken as opaque) source on a canvas.

    Args:
        src: (h, w, 3|4) source image.
        params: Placement relative to the canvas center.
        canvas: (width, height).

    Returns:
        (H, W, 4) straight-alpha RGBA; pixels outside the source have alpha 0.

    Raises:
        ValueError: If the canvas is not positive.
        SingularTransformError: If the transform is singular.
    """
    width, height = canvas
    if width <= 0 or height <= 0:
        raise ValueError(f"Canvas must be positive, got {canvas}")
    src = np.asarray(src, dtype=np.float64)
    if src.shape[2] == 3:
        src = np.concatenate([src, np.ones(src.shape[:2] + (1,))], axis=-1)
    dst_anchor = ((width - 1) / 2.0, (height - 1) / 2.0)
    m = params.matrix(image_center(src.shape), dst_anchor)
    return _unpremultiply(warp_premultiplied(src, m, (height, width)))


def render_placements(ps: PlacementSet, *,
                      origin: Sequence[float] = (0.0, 0.0),
                      shape: Sequence[int] | None = None) -> NDArray[np.float64]:
    """Render every element once as premultiplied RGBA.

    Args:
        ps: The placement set.
        origin: Canvas coordinates of the output's top-left pixel.
        shape: (H, W) of the output; the whole canvas by default.

    Returns:
        (N, H, W, 4) stack in element order.
    """
    out_shape = (ps.height, ps.width) if shape is None else tuple(shape)
    shift = np.array([[1.0, 0.0, -origin[0]], [0.0, 1.0, -origin[1]], [0.0, 0.0, 1.0]])
    stack = np.zeros((len(ps.elements),) + tuple(out_shape) + (4,))
    anchor = ps.canvas_anchor
    for i, e in enumerate(ps.elements):
        m = shift @ e.params.matrix(e.anchor, anchor)
        stack[i] = warp_premultiplied(e.image, m, out_shape)
    return stack


def composite_premultiplied(ps: PlacementSet, layers: np.ndarray,
                            background: np.ndarray) -> RasterImage:
    """Back-to-front over-compositing of pre-rendered premultiplied layers."""
    out = np.array(background[..., :3], dtype=np.float64, copy=True)
    for i in depth_order(ps.elements):
        out = layers[i, ..., :3] + (1.0 - layers[i, ..., 3:4]) * out
    return out


def composite_hard(ps: PlacementSet, background: RasterImage) -> RasterImage:
    """Composite elements in ascending rounded-z order over the background.

    Raises:
        DimensionMismatchError: If the background does not match the canvas.
    """
    background = np.asarray(background, dtype=np.float64)
    if background.shape[:2] != (ps.height, ps.width):
        raise DimensionMismatchError(
            f"Background size {background.shape[:2]} does not match canvas "
            f"{(ps.height, ps.width)}")
    if not ps.elements:
        return np.array(background[..., :3], copy=True)
    return composite_premultiplied(ps, render_placements(ps), background)


def visibility_masks(ps: PlacementSet,
                     layers: np.ndarray | None = None) -> dict[int, BinaryMask]:
    """Visible pixels of every element: alpha > 0.5 and no such pixel above."""
    if layers is None:
        layers = render_placements(ps)
    covered = np.zeros(layers.shape[1:3], dtype=bool)
    masks: dict[int, BinaryMask] = {}
    for i in reversed(depth_order(ps.elements)):
        solid = layers[i, ..., 3] > VISIBILITY_THRESHOLD
        masks[ps.elements[i].element_id] = solid & ~covered
        covered |= solid
    return masks


def visibility_mask(ps: PlacementSet, element_id: int,
                    layers: np.ndarray | None = None) -> BinaryMask:
    """Canvas-space mask where one element stays visible after compositing.

    Raises:
        UnknownElementError: If element_id is not in the set.
    """
    ps.index_of(element_id)
    masks = visibility_masks(ps, layers)
    if element_id not in masks:
        raise UnknownElementError(f"No element with id {element_id}")
    return masks[element_id]
