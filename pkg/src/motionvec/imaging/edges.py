"""Canny edge detection on luminance images."""
import numpy as np
from skimage import feature

from .raster import BinaryMask

__all__ = ["detect_edges"]


def detect_edges(lum: np.ndarray, low: float = 0.1, high: float = 0.2,
                 sigma: float = 1.0) -> BinaryMask:
    """Canny edge mask of a single-channel [0, 1] image.

    Gaussian smoothing, Sobel gradients, non-maximum suppression and
    hysteresis between low and high. Borders are handled by replicating
    edge pixels, so a constant image yields no edges.

    Raises:
        ValueError: If the input is not 2-D or 0 <= low <= high fails.
    """
    lum = np.asarray(lum, dtype=np.float64)
    if lum.ndim == 3 and lum.shape[2] == 1:
        lum = lum[..., 0]
    if lum.ndim != 2:
        raise ValueError(f"detect_edges expects a single-channel image, got {lum.shape}")
    if not 0 <= low <= high:
        raise ValueError(f"Thresholds must satisfy 0 <= low <= high, got {low}, {high}")
    return feature.canny(lum, sigma=sigma, low_threshold=low,
                         high_threshold=high, mode="nearest")
