"""Tracked objects, their per-frame placements and canonical images."""
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from ..diffcomp.affine import AffineParams, translation_matrix
from ..exceptions import EmptyMaskError
from ..imaging.raster import BinaryMask, RasterImage, mask_area, mask_bbox

__all__ = ["Placement", "TrackedObject", "crop_rgba", "update_canonical",
           "is_occluded"]

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Placement:
    """An object's state in one frame.

    Attributes:
        params: Motion from the previous frame, as the frame-space matrix
            params.matrix() about the origin; identity at first appearance.
        z: Integer depth rank among the objects present in the frame.
        mask: Labeled pixels of the object in the frame.
    """
    params: AffineParams
    z: int
    mask: BinaryMask = field(repr=False)


def crop_rgba(frame: RasterImage, mask: BinaryMask
              ) -> tuple[NDArray[np.float64], tuple[int, int]]:
    """Tight crop of the masked pixels as RGBA (alpha = mask) and its (x0, y0).

    Raises:
        EmptyMaskError: If the mask is empty.
    """
    x0, y0, x1, y1 = mask_bbox(mask)
    rgb = np.asarray(frame, dtype=np.float64)[y0:y1 + 1, x0:x1 + 1, :3]
    alpha = np.asarray(mask, dtype=np.float64)[y0:y1 + 1, x0:x1 + 1, None]
    return np.concatenate([rgb, alpha], axis=-1), (x0, y0)


@dataclass(eq=False)
class TrackedObject:
    """An object followed through the video.

    Attributes:
        object_id: Unique identifier.
        canonical: Tight-cropped RGBA appearance, alpha from the mask.
        canonical_area: Alpha support of the canonical image.
        canonical_frame: Frame the canonical image was cut from.
        canonical_origin: Frame coordinates (x0, y0) of the crop.
        timeline: Placement per frame, contiguous from first appearance.
        alive: False once the object disappeared or split.
        parts: Former object id -> frame -> labeled pixels, for objects
            merged into this one. Their placements are folded into the
            timeline; the masks keep the ids the decision log refers to.
    """
    object_id: int
    canonical: NDArray[np.float64] = field(repr=False)
    canonical_area: int
    canonical_frame: int
    canonical_origin: tuple[int, int]
    timeline: dict[int, Placement] = field(default_factory=dict, repr=False)
    alive: bool = True
    parts: dict[int, dict[int, BinaryMask]] = field(default_factory=dict, repr=False)

    @classmethod
    def from_pixels(cls, object_id: int, frame: RasterImage, mask: BinaryMask,
                    t: int, z: int = 0) -> "TrackedObject":
        """New object whose canonical image and first placement come from frame t."""
        canonical, origin = crop_rgba(frame, mask)
        obj = cls(object_id=object_id, canonical=canonical,
                  canonical_area=mask_area(mask), canonical_frame=t,
                  canonical_origin=origin)
        obj.timeline[t] = Placement(AffineParams(), z, np.asarray(mask, dtype=bool))
        return obj

    @property
    def first_frame(self) -> int:
        return min(self.timeline)

    @property
    def last_frame(self) -> int:
        return max(self.timeline)

    @property
    def frames(self) -> list[int]:
        return sorted(self.timeline)

    def canonical_matrix(self) -> NDArray[np.float64]:
        """Canonical-image-to-frame matrix at the canonical frame."""
        return translation_matrix(*self.canonical_origin)

    def record(self, t: int, params: AffineParams, z: int, mask: BinaryMask) -> None:
        """Add the placement for frame t.

        Raises:
            ValueError: If t does not extend the timeline contiguously.
        """
        if self.timeline and t != self.last_frame + 1:
            raise ValueError(f"Object {self.object_id} timeline ends at "
                             f"{self.last_frame}, cannot record frame {t}")
        self.timeline[t] = Placement(params, int(z), np.asarray(mask, dtype=bool))


def is_occluded(object_id: int, t: int, objects: Mapping[int, TrackedObject],
                margin: int = 1) -> bool:
    """True if a higher-z object's mask touches this object's mask (dilated by margin)."""
    placement = objects[object_id].timeline[t]
    grown = placement.mask
    if margin > 0:
        grown = ndimage.binary_dilation(grown, iterations=margin)
    for other_id, other in objects.items():
        if other_id == object_id or t not in other.timeline:
            continue
        above = other.timeline[t]
        if above.z > placement.z and np.any(above.mask & grown):
            return True
    return False


def update_canonical(obj: TrackedObject, frame: RasterImage, t: int,
                     occluded: bool) -> bool:
    """Replace the canonical image when the object is unoccluded and larger at t.

    Returns:
        True if the canonical image changed.
    """
    mask = obj.timeline[t].mask
    area = mask_area(mask)
    if occluded or area <= obj.canonical_area:
        return False
    try:
        obj.canonical, obj.canonical_origin = crop_rgba(frame, mask)
    except EmptyMaskError:
        return False
    obj.canonical_area = area
    obj.canonical_frame = t
    logger.debug("Object %d: canonical updated at frame %d (area %d)",
                 obj.object_id, t, area)
    return True
