"""Color conversion and Lab color histograms."""
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from skimage import color as skcolor

from ..exceptions import BinMismatchError, EmptyMaskError
from .raster import BinaryMask, RasterImage, check_same_size

__all__ = [
    "rgb_to_lab",
    "lab_to_rgb",
    "luminance",
    "LabHistogram",
    "lab_histogram",
    "hellinger_distance",
]

_LAB_OFFSET = np.array([0.0, 128.0, 128.0])
_LAB_SCALE = np.array([100.0, 255.0, 255.0])


def rgb_to_lab(img: RasterImage) -> RasterImage:
    """Convert sRGB to CIE-Lab (D65), rescaled to [0, 1] per channel.

    The rescaling is L/100, (a+128)/255, (b+128)/255. An alpha channel, if
    present, is passed through unchanged.
    """
    img = np.asarray(img, dtype=np.float64)
    lab = skcolor.rgb2lab(img[..., :3])
    scaled = (lab + _LAB_OFFSET) / _LAB_SCALE
    if img.shape[-1] == 4:
        scaled = np.concatenate([scaled, img[..., 3:4]], axis=-1)
    return scaled


def lab_to_rgb(lab: RasterImage) -> RasterImage:
    """Inverse of rgb_to_lab; results are clipped to [0, 1]."""
    lab = np.asarray(lab, dtype=np.float64)
    raw = lab[..., :3] * _LAB_SCALE - _LAB_OFFSET
    rgb = np.clip(skcolor.lab2rgb(raw), 0.0, 1.0)
    if lab.shape[-1] == 4:
        rgb = np.concatenate([rgb, lab[..., 3:4]], axis=-1)
    return rgb


def luminance(img: RasterImage) -> NDArray[np.float64]:
    """Rec. 709 luma of the RGB channels as an (H, W) array."""
    img = np.asarray(img, dtype=np.float64)
    return img[..., 0] * 0.2126 + img[..., 1] * 0.7152 + img[..., 2] * 0.0722


@dataclass(frozen=True, eq=False)
class LabHistogram:
    """Per-channel normalized histogram over L, a, b.

    Attributes:
        bins_per_channel: Number of bins per channel.
        counts: (3, bins) array; each row sums to 1.
    """
    bins_per_channel: int
    counts: NDArray[np.float64]


def lab_histogram(lab: RasterImage, mask: BinaryMask, bins: int = 64) -> LabHistogram:
    """Histogram of masked pixels of a rescaled-Lab image.

    Args:
        lab: Image from rgb_to_lab.
        mask: Pixels to count.
        bins: Bins per channel over [0, 1].

    Raises:
        EmptyMaskError: If the mask is empty.
        ValueError: If bins < 2.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    check_same_size(lab, mask, "Image and mask")
    mask = np.asarray(mask, dtype=bool)
    n = int(np.count_nonzero(mask))
    if n == 0:
        raise EmptyMaskError("Cannot build a histogram of an empty mask")
    pixels = np.clip(lab[mask][:, :3], 0.0, 1.0)
    counts = np.stack([np.histogram(pixels[:, c], bins=bins, range=(0.0, 1.0))[0]
                       for c in range(3)]).astype(np.float64)
    return LabHistogram(bins_per_channel=bins, counts=counts / n)


def hellinger_distance(h1: LabHistogram, h2: LabHistogram) -> float:
    """Mean over channels of sqrt(1 - sum(sqrt(p * q))).

    Raises:
        BinMismatchError: If the histograms have different bin counts.
    """
    if h1.bins_per_channel != h2.bins_per_channel:
        raise BinMismatchError(f"Histogram bins differ: {h1.bins_per_channel} "
                               f"vs {h2.bins_per_channel}")
    bc = np.sum(np.sqrt(h1.counts * h2.counts), axis=1)
    per_channel = np.sqrt(np.clip(1.0 - bc, 0.0, 1.0))
    return float(np.mean(per_channel))
