"""Coarse object-to-region correspondence weights."""
from dataclasses import dataclass

import numpy as np

from ..configuration.module_configs import ImagingConfig
from ..exceptions import EmptyMaskError
from ..imaging.color import hellinger_distance, lab_histogram, rgb_to_lab
from ..imaging.raster import BinaryMask, RasterImage, mask_area
from ..imaging.shape import cosine_similarity, efd_of_mask
from .field import FlowField, advect_mask

__all__ = ["CoarseWeight", "coarse_weight", "flow_overlap"]


@dataclass(frozen=True)
class CoarseWeight:
    """Shape, color and flow agreement; w is their product."""
    w_shape: float
    w_color: float
    w_flow: float

    @property
    def w(self) -> float:
        return self.w_shape * self.w_color * self.w_flow


def flow_overlap(obj_mask: BinaryMask, region_mask: BinaryMask,
                 fwd: FlowField, bwd: FlowField) -> float:
    """(|adv(O) & R| + |O & adv_bwd(R)|) / (|adv(O)| + |adv_bwd(R)|), 0 if empty."""
    moved_obj = advect_mask(obj_mask, fwd)
    moved_region = advect_mask(region_mask, bwd)
    denominator = mask_area(moved_obj) + mask_area(moved_region)
    if denominator == 0:
        return 0.0
    numerator = (mask_area(moved_obj & region_mask)
                 + mask_area(np.asarray(obj_mask, dtype=bool) & moved_region))
    return numerator / denominator


def coarse_weight(obj_mask: BinaryMask, obj_img: RasterImage,
                  region_mask: BinaryMask, region_img: RasterImage,
                  fwd: FlowField, bwd: FlowField,
                  cfg: ImagingConfig | None = None) -> CoarseWeight:
    """Score how plausibly an object in frame t-1 became a region in frame t.

    Both masks are in frame coordinates; obj_img and region_img are the
    frames they were cut from.

    Raises:
        EmptyMaskError: If either mask is empty.
    """
    cfg = cfg or ImagingConfig()
    if mask_area(obj_mask) == 0 or mask_area(region_mask) == 0:
        raise EmptyMaskError("coarse_weight needs nonempty object and region masks")
    w_shape = abs(cosine_similarity(efd_of_mask(obj_mask, cfg.efd_orders),
                                    efd_of_mask(region_mask, cfg.efd_orders)))
    h_obj = lab_histogram(rgb_to_lab(obj_img), obj_mask, cfg.hist_bins)
    h_region = lab_histogram(rgb_to_lab(region_img), region_mask, cfg.hist_bins)
    w_color = 1.0 - hellinger_distance(h_obj, h_region)
    w_flow = flow_overlap(obj_mask, region_mask, fwd, bwd)
    return CoarseWeight(w_shape=min(1.0, w_shape),
                        w_color=float(np.clip(w_color, 0.0, 1.0)),
                        w_flow=float(w_flow))
