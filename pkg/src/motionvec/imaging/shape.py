"""Outer contours and elliptic Fourier shape descriptors.

Descriptors drop the position (DC) term and are unit-normalized. They are
normalized for the contour starting point (the trace is rolled to begin at
its topmost-leftmost vertex) but not for rotation or scale.
"""
from typing import Final, TypeAlias

import numpy as np
from numpy.typing import NDArray
from pyefd import elliptic_fourier_descriptors
from scipy import ndimage

from ..exceptions import EmptyMaskError
from .raster import BinaryMask

__all__ = [
    "ShapeDescriptor",
    "largest_component",
    "trace_outer_contour",
    "efd_of_contour",
    "efd_of_mask",
    "cosine_similarity",
]

ShapeDescriptor: TypeAlias = NDArray[np.float64]

# Clockwise on screen (rows grow downward), starting north.
_RING: Final[tuple[tuple[int, int], ...]] = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))
_RING_INDEX: Final[dict[tuple[int, int], int]] = {d: i for i, d in enumerate(_RING)}
_EIGHT: Final[NDArray[np.int_]] = np.ones((3, 3), dtype=int)


def largest_component(mask: BinaryMask) -> BinaryMask:
    """Largest 8-connected component (lowest label wins ties).

    Raises:
        EmptyMaskError: If the mask is empty.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=_EIGHT)
    if n == 0:
        raise EmptyMaskError("Mask has no foreground pixels")
    sizes = np.bincount(labels.ravel())[1:]
    return labels == int(np.argmax(sizes)) + 1


def trace_outer_contour(mask: BinaryMask) -> NDArray[np.float64]:
    """Moore-neighbor trace of the largest component's outer boundary.

    Args:
        mask: Binary mask with at least one set pixel.

    Returns:
        (N, 2) array of (x, y) pixel coordinates, clockwise on screen,
        starting at the topmost-leftmost pixel, not closed.

    Raises:
        EmptyMaskError: If the mask is empty.
    """
    comp = np.pad(largest_component(mask), 1)
    rows, cols = np.nonzero(comp)
    start = (int(rows[0]), int(cols[0]))

    contour = [start]
    current = start
    back = 6  # west of the topmost-leftmost pixel is background
    first_state = None
    for _ in range(8 * comp.size):
        for k in range(1, 9):
            d = (back + k) % 8
            nb = (current[0] + _RING[d][0], current[1] + _RING[d][1])
            if comp[nb]:
                break
        else:
            break  # isolated pixel
        state = (current, d)
        if first_state is None:
            first_state = state
        elif state == first_state:
            break
        prev_d = _RING[(d - 1) % 8]
        prev = (current[0] + prev_d[0], current[1] + prev_d[1])
        back = _RING_INDEX[(prev[0] - nb[0], prev[1] - nb[1])]
        contour.append(nb)
        current = nb

    if len(contour) > 1 and contour[-1] == start:
        contour.pop()
    pts = np.array([(c - 1, r - 1) for r, c in contour], dtype=np.float64)
    return pts


def _roll_to_canonical_start(contour: NDArray[np.float64]) -> NDArray[np.float64]:
    """Roll a closed contour so it starts at its topmost-leftmost vertex."""
    order = np.lexsort((contour[:, 0], contour[:, 1]))
    best = contour[order[0]]
    candidates = np.nonzero(np.all(contour == best, axis=1))[0]
    rolled = [np.roll(contour, -int(i), axis=0) for i in candidates]
    if len(rolled) == 1:
        return rolled[0]
    return min(rolled, key=lambda r: tuple(r[:, ::-1].ravel()))


def efd_of_contour(contour: np.ndarray, orders: int = 36) -> ShapeDescriptor:
    """Unit-normalized elliptic Fourier coefficients of a closed contour.

    Args:
        contour: (N, 2) vertices (x, y), first vertex not repeated.
        orders: Number of harmonics.

    Returns:
        Flat vector of length 4 * orders, (a_n, b_n, c_n, d_n) per harmonic.

    Raises:
        EmptyMaskError: If the contour has no vertices.
    """
    pts = np.asarray(contour, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyMaskError("Empty contour")
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.diff(pts, axis=0) != 0, axis=1)
    pts = pts[keep]
    if len(pts) > 1 and np.all(pts[-1] == pts[0]):
        pts = pts[:-1]
    if len(pts) < 3:
        # Points and segments: trace the pixel squares' bounding box.
        x0, y0 = pts.min(axis=0) - 0.5
        x1, y1 = pts.max(axis=0) + 0.5
        pts = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    pts = _roll_to_canonical_start(pts)
    closed = np.vstack([pts, pts[:1]])
    coeffs = elliptic_fourier_descriptors(closed, order=orders, normalize=False)
    flat = np.asarray(coeffs, dtype=np.float64).ravel()
    norm = np.linalg.norm(flat)
    if norm == 0.0:
        raise EmptyMaskError("Contour encloses no area")
    return flat / norm


def efd_of_mask(mask: BinaryMask, orders: int = 36) -> ShapeDescriptor:
    """Shape descriptor of the largest component's outer contour.

    Raises:
        EmptyMaskError: If the mask is empty.
    """
    return efd_of_contour(trace_outer_contour(mask), orders)


def cosine_similarity(d1: ShapeDescriptor, d2: ShapeDescriptor) -> float:
    """Cosine of the angle between two descriptors (0 if either is zero)."""
    n1 = np.linalg.norm(d1)
    n2 = np.linalg.norm(d2)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    return float(np.dot(d1, d2) / (n1 * n2))
