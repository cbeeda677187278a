"""Foreground region extraction: trapped-ball filling or connected components.

Trapped-ball filling grows fills from the places a ball of radius r fits
inside the edge-free foreground, for r from ball_radius_max down to 1, so
small gaps in an edge line do not leak one fill into its neighbor. Leftover
foreground pixels join the touching fill of closest mean color, adjacent
fills whose shared boundary carries too few edge pixels are merged again,
and slivers below min_area are absorbed or dropped.
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage
from skimage.morphology import disk

from ..configuration.module_configs import SegmentationConfig
from ..imaging.color import rgb_to_lab
from ..imaging.raster import BinaryMask, RasterImage, check_same_size

__all__ = ["Region", "extract_regions", "regions_from_labels", "label_image"]

_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass(eq=False)
class Region:
    """A connected foreground piece of one frame.

    Attributes:
        frame_index: Frame the region belongs to.
        region_id: Identifier unique within the frame, starting at 1.
        mask: Full-frame boolean mask.
        bbox: Inclusive (x0, y0, x1, y1).
        centroid: Mean (x, y) of the mask.
        area: Pixel count.
    """
    frame_index: int
    region_id: int
    mask: BinaryMask = field(repr=False)
    bbox: tuple[int, int, int, int] = (0, 0, 0, 0)
    centroid: tuple[float, float] = (0.0, 0.0)
    area: int = 0

    @classmethod
    def from_mask(cls, frame_index: int, region_id: int, mask: BinaryMask) -> "Region":
        """Build a region and derive bbox, centroid and area from the mask.

        Raises:
            ValueError: If the mask is empty.
        """
        mask = np.asarray(mask, dtype=bool)
        ys, xs = np.nonzero(mask)
        if xs.size == 0:
            raise ValueError(f"Region {region_id} of frame {frame_index} is empty")
        return cls(frame_index=frame_index, region_id=region_id, mask=mask,
                   bbox=(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())),
                   centroid=(float(xs.mean()), float(ys.mean())), area=int(xs.size))


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Consecutive ids 1..n ordered by descending area, then topmost-leftmost pixel."""
    ids = [i for i in np.unique(labels) if i > 0]
    keys = []
    flat = labels.ravel()
    for i in ids:
        positions = np.flatnonzero(flat == i)
        first = int(positions[0])
        keys.append((-positions.size, first // labels.shape[1], first % labels.shape[1], i))
    out = np.zeros_like(labels)
    for new_id, (_, _, _, old) in enumerate(sorted(keys), start=1):
        out[labels == old] = new_id
    return out


def _adjacent_pairs(labels: np.ndarray, edges: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique 4-adjacent label pairs (a < b), their boundary length and edge count."""
    a = np.concatenate([labels[:, :-1].ravel(), labels[:-1, :].ravel()])
    b = np.concatenate([labels[:, 1:].ravel(), labels[1:, :].ravel()])
    e = np.concatenate([(edges[:, :-1] | edges[:, 1:]).ravel(),
                        (edges[:-1, :] | edges[1:, :]).ravel()])
    keep = (a > 0) & (b > 0) & (a != b)
    if not np.any(keep):
        empty = np.zeros((0, 2), dtype=labels.dtype)
        return empty, np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    pairs = np.column_stack([np.minimum(a[keep], b[keep]), np.maximum(a[keep], b[keep])])
    unique, inverse, totals = np.unique(pairs, axis=0, return_inverse=True,
                                        return_counts=True)
    edge_counts = np.bincount(inverse.ravel(), weights=e[keep], minlength=len(unique))
    return unique, totals, edge_counts.astype(int)


def _find(parent: dict[int, int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _trapped_ball_fill(free: np.ndarray, radius_max: int) -> tuple[np.ndarray, int]:
    labels = np.zeros(free.shape, dtype=np.int64)
    next_label = 1
    for r in range(radius_max, 0, -1):
        ball = disk(r).astype(bool)
        available = free & (labels == 0)
        core = ndimage.binary_erosion(available, structure=ball)
        cores, n = ndimage.label(core, structure=_FOUR)
        if n == 0:
            continue
        grown = ndimage.binary_dilation(core, structure=ball) & available
        _, (iy, ix) = ndimage.distance_transform_edt(~core, return_indices=True)
        nearest = cores[iy, ix]
        labels[grown] = nearest[grown] + next_label - 1
        next_label += n
    return labels, next_label


def _mean_colors(lab: np.ndarray, labels: np.ndarray, count: int) -> np.ndarray:
    sums = np.stack([np.bincount(labels.ravel(), weights=lab[..., c].ravel(),
                                 minlength=count) for c in range(3)], axis=1)
    sizes = np.bincount(labels.ravel(), minlength=count)[:, None]
    return np.divide(sums, sizes, out=np.zeros_like(sums), where=sizes > 0)


def _complete_residuals(labels: np.ndarray, fg: np.ndarray, lab: np.ndarray,
                        next_label: int) -> np.ndarray:
    residual = fg & (labels == 0)
    pieces, n = ndimage.label(residual, structure=_FOUR)
    means = _mean_colors(lab, labels, next_label)
    for k in range(1, n + 1):
        piece = pieces == k
        ring = ndimage.binary_dilation(piece, structure=_FOUR) & ~piece
        touching = np.unique(labels[ring])
        touching = touching[touching > 0]
        if touching.size == 0:
            labels[piece] = next_label
            next_label += 1
            continue
        color = lab[piece].mean(axis=0)
        distances = np.linalg.norm(means[touching] - color, axis=1)
        labels[piece] = touching[int(np.argmin(distances))]
    return labels


def _merge_weak_boundaries(labels: np.ndarray, edges: np.ndarray,
                           separation: float) -> np.ndarray:
    pairs, totals, edge_counts = _adjacent_pairs(labels, edges)
    parent = {int(i): int(i) for i in np.unique(labels) if i > 0}
    for (a, b), total, on_edge in zip(pairs, totals, edge_counts):
        if on_edge < separation * total:
            ra, rb = _find(parent, int(a)), _find(parent, int(b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    lookup = np.arange(labels.max() + 1)
    for i in parent:
        lookup[i] = _find(parent, i)
    return lookup[labels]


def _absorb_small(labels: np.ndarray, min_area: int) -> np.ndarray:
    while True:
        ids, sizes = np.unique(labels[labels > 0], return_counts=True)
        small = [(int(s), int(i)) for i, s in zip(ids, sizes) if s < min_area]
        if not small:
            return labels
        size_of = dict(zip(ids.tolist(), sizes.tolist()))
        _, target = min(small)
        piece = labels == target
        ring = ndimage.binary_dilation(piece, structure=_FOUR) & ~piece
        neighbors = [int(i) for i in np.unique(labels[ring]) if i > 0]
        if neighbors:
            labels[piece] = max(neighbors, key=lambda i: (size_of[i], -i))
        else:
            labels[piece] = 0


def label_image(frame: RasterImage, fg: BinaryMask, edges: BinaryMask,
                cfg: SegmentationConfig | None = None) -> NDArray[np.int64]:
    """Region labels (0 = background) in canonical order."""
    cfg = cfg or SegmentationConfig()
    check_same_size(frame, fg, "Frame and foreground mask")
    check_same_size(frame, edges, "Frame and edge mask")
    fg = np.asarray(fg, dtype=bool)
    edges = np.asarray(edges, dtype=bool) & fg
    if not np.any(fg):
        return np.zeros(fg.shape, dtype=np.int64)
    if cfg.mode == "components" or not np.any(edges):
        labels, _ = ndimage.label(fg, structure=_FOUR)
    else:
        lab = rgb_to_lab(np.asarray(frame, dtype=np.float64)[..., :3])[..., :3]
        labels, next_label = _trapped_ball_fill(fg & ~edges, cfg.ball_radius_max)
        labels = _complete_residuals(labels, fg, lab, next_label)
        labels = _merge_weak_boundaries(labels, edges, cfg.edge_separation)
    labels = _absorb_small(labels.astype(np.int64), cfg.min_area)
    return _relabel(labels)


def regions_from_labels(labels: np.ndarray, frame_index: int = 0) -> list[Region]:
    """One Region per nonzero label, keeping the label values as ids."""
    labels = np.asarray(labels)
    return [Region.from_mask(frame_index, int(i), labels == i)
            for i in np.unique(labels) if i > 0]


def extract_regions(frame: RasterImage, fg: BinaryMask, edges: BinaryMask,
                    cfg: SegmentationConfig | None = None,
                    frame_index: int = 0) -> list[Region]:
    """Split the foreground of one frame into regions.

    Edge pixels outside the foreground are ignored. In "components" mode,
    or when no edge falls inside the foreground, regions are the
    4-connected components of the foreground. Region ids follow descending
    area, ties broken by the topmost-leftmost pixel.

    Returns:
        Regions ordered by id; empty when the foreground is empty.
    """
    return regions_from_labels(label_image(frame, fg, edges, cfg), frame_index)
