"""Background model estimation and foreground masks."""
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage
from sklearn.cluster import KMeans

from ..configuration.module_configs import SegmentationConfig
from ..imaging.color import lab_to_rgb, rgb_to_lab
from ..imaging.raster import BinaryMask, RasterImage, check_same_size

__all__ = ["BackgroundModel", "estimate_background", "foreground_mask"]

logger = logging.getLogger(__name__)


@dataclass
class BackgroundModel:
    """Either a solid Lab color or a static RGB image, with a Lab tolerance.

    Attributes:
        kind: "solid-color" or "static-image".
        color: Rescaled Lab triple (solid case).
        image: (H, W, 3) RGB raster (static case).
        tolerance: Rescaled-Lab distance above which a pixel is foreground.
    """
    kind: Literal["solid-color", "static-image"]
    color: NDArray[np.float64] | None = None
    image: RasterImage | None = None
    tolerance: float = 0.08

    def __post_init__(self):
        if self.kind == "solid-color":
            if self.color is None or self.image is not None:
                raise ValueError("A solid-color background needs a color and no image")
            self.color = np.asarray(self.color, dtype=np.float64).reshape(3)
        elif self.kind == "static-image":
            if self.image is None or self.color is not None:
                raise ValueError("A static-image background needs an image and no color")
            self.image = np.asarray(self.image, dtype=np.float64)[..., :3]
        else:
            raise ValueError(f"Unknown background kind '{self.kind}'")
        if self.tolerance < 0:
            raise ValueError(f"Tolerance must be >= 0, got {self.tolerance}")

    @classmethod
    def solid_rgb(cls, rgb: Sequence[float], tolerance: float = 0.08) -> "BackgroundModel":
        lab = rgb_to_lab(np.asarray(rgb, dtype=np.float64).reshape(1, 1, 3))
        return cls(kind="solid-color", color=lab[0, 0, :3], tolerance=tolerance)

    @property
    def rgb(self) -> NDArray[np.float64]:
        """Background RGB color (solid case) or the image's mean color."""
        if self.kind == "solid-color":
            return np.clip(lab_to_rgb(self.color.reshape(1, 1, 3))[0, 0], 0.0, 1.0)
        return self.image.reshape(-1, 3).mean(axis=0)

    def render(self, width: int, height: int) -> RasterImage:
        """(height, width, 3) RGB background raster.

        Raises:
            ValueError: If a static image does not match the requested size.
        """
        if self.kind == "solid-color":
            return np.broadcast_to(self.rgb, (height, width, 3)).copy()
        if self.image.shape[:2] != (height, width):
            raise ValueError(f"Background image is {self.image.shape[:2]}, "
                             f"requested {(height, width)}")
        return self.image.copy()

    def get_params(self) -> dict:
        return {"kind": self.kind, "color": self.color, "image": self.image,
                "tolerance": self.tolerance}


def _sample_indices(count: int, wanted: int) -> list[int]:
    return sorted({int(round(v)) for v in np.linspace(0, count - 1, min(count, wanted))})


def estimate_background(frames: Sequence[RasterImage],
                        cfg: SegmentationConfig | None = None) -> BackgroundModel:
    """Mode color of the sampled frames by k-means in Lab.

    Up to cfg.bg_sample_frames frames spread over the video are subsampled
    with cfg.bg_sample_stride; the center of the most populated cluster is
    the background color.

    Raises:
        ValueError: If no frames are given.
    """
    cfg = cfg or SegmentationConfig()
    if not frames:
        raise ValueError("estimate_background needs at least one frame")
    stride = cfg.bg_sample_stride
    samples = [rgb_to_lab(np.asarray(frames[i])[::stride, ::stride, :3])[..., :3].reshape(-1, 3)
               for i in _sample_indices(len(frames), cfg.bg_sample_frames)]
    pixels = np.concatenate(samples)
    distinct = len(np.unique(np.round(pixels, 6), axis=0))
    k = max(1, min(cfg.bg_clusters, distinct))
    km = KMeans(n_clusters=k, n_init=4, random_state=cfg.seed).fit(pixels)
    counts = np.bincount(km.labels_, minlength=k)
    color = km.cluster_centers_[int(np.argmax(counts))]
    logger.info("Estimated background from %d pixels: %d clusters, mode share %.2f",
                len(pixels), k, counts.max() / len(pixels))
    return BackgroundModel(kind="solid-color", color=color, tolerance=cfg.bg_tolerance)


def foreground_mask(frame: RasterImage, bg: BackgroundModel) -> BinaryMask:
    """Pixels farther than bg.tolerance from the background in Lab, opened by 1 px.

    Raises:
        DimensionMismatchError: If a static background differs in size.
    """
    lab = rgb_to_lab(np.asarray(frame, dtype=np.float64)[..., :3])[..., :3]
    if bg.kind == "static-image":
        check_same_size(frame, bg.image, "Frame and background image")
        reference = rgb_to_lab(bg.image)[..., :3]
    else:
        reference = bg.color
    distance = np.sqrt(((lab - reference) ** 2).sum(axis=-1))
    mask = distance > bg.tolerance
    return ndimage.binary_opening(mask, structure=ndimage.generate_binary_structure(2, 1))
