"""2x2 box-filter image pyramids."""
from typing import Final

import numpy as np

from ..exceptions import TooManyLevelsError

__all__ = ["MIN_LEVEL_SIZE", "downsample2", "image_pyramid", "max_pyramid_levels"]

MIN_LEVEL_SIZE: Final[int] = 4


def _halve_axis(a: np.ndarray, axis: int) -> np.ndarray:
    n = a.shape[axis]
    half = n // 2
    a = np.moveaxis(a, axis, 0)
    out = a[0:2 * half:2] + a[1:2 * half:2]
    counts = np.full(half, 2.0)
    if n % 2:
        # Odd size: the leftover row joins the last output row.
        out[-1] = out[-1] + a[-1]
        counts[-1] = 3.0
    out = out / counts.reshape((-1,) + (1,) * (out.ndim - 1))
    return np.moveaxis(out, 0, axis)


def downsample2(img: np.ndarray) -> np.ndarray:
    """Halve height and width by 2x2 averaging (floor division of sizes)."""
    img = np.asarray(img, dtype=np.float64)
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise TooManyLevelsError(f"Cannot downsample an image of size {img.shape[:2]}")
    return _halve_axis(_halve_axis(img, 0), 1)


def max_pyramid_levels(height: int, width: int) -> int:
    """Largest level count whose smallest level keeps both sides >= 4 px."""
    levels = 1
    h, w = height, width
    while min(h // 2, w // 2) >= MIN_LEVEL_SIZE:
        h, w = h // 2, w // 2
        levels += 1
    return levels


def image_pyramid(img: np.ndarray, levels: int) -> list[np.ndarray]:
    """Return [img, img/2, img/4, ...] with the requested number of levels.

    Raises:
        ValueError: If levels < 1.
        TooManyLevelsError: If min(height, width) / 2**(levels-1) < 4.
    """
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    if min(h, w) / 2 ** (levels - 1) < MIN_LEVEL_SIZE:
        raise TooManyLevelsError(
            f"{levels} levels would shrink a {w}x{h} image below "
            f"{MIN_LEVEL_SIZE} px")
    pyramid = [img]
    for _ in range(levels - 1):
        pyramid.append(downsample2(pyramid[-1]))
    return pyramid
