"""Coarse-to-fine block-matching optical flow.

Each pyramid level matches square blocks of the previous frame against the
next frame within a small search window around the displacement inherited
from the coarser level, using the sum of absolute RGB differences. Ties go
to the smaller displacement, which keeps flat areas at zero flow.
"""
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..configuration.module_configs import FlowConfig
from ..configuration.pipeline_config import worker_count
from ..exceptions import DimensionMismatchError, FrameIOError
from ..imaging.pyramid import image_pyramid, max_pyramid_levels
from ..imaging.raster import RasterImage
from .field import FlowField, read_flo

__all__ = ["compute_flow", "flow_for_video", "FORWARD_FLO", "BACKWARD_FLO"]

logger = logging.getLogger(__name__)

FORWARD_FLO = "forward_{:05d}.flo"
BACKWARD_FLO = "backward_{:05d}.flo"


def _search_offsets(radius: int) -> list[tuple[int, int]]:
    offsets = [(dx, dy) for dy in range(-radius, radius + 1)
               for dx in range(-radius, radius + 1)]
    return sorted(offsets, key=lambda d: (abs(d[0]) + abs(d[1]),
                                          abs(d[1]), abs(d[0]), d[1], d[0]))


def _match_level(prev: np.ndarray, nxt: np.ndarray, init: np.ndarray,
                 block: int, radius: int) -> np.ndarray:
    """Best per-block displacement at one level.

    Args:
        prev, nxt: (h, w, 3) images.
        init: (nby, nbx, 2) integer starting displacements.
    """
    h, w = prev.shape[:2]
    nby, nbx = init.shape[:2]
    ph, pw = nby * block, nbx * block
    prev_p = np.pad(prev, ((0, ph - h), (0, pw - w), (0, 0)), mode="edge")
    ys, xs = np.mgrid[0:ph, 0:pw]
    iy = np.repeat(np.repeat(init[..., 1], block, axis=0), block, axis=1)
    ix = np.repeat(np.repeat(init[..., 0], block, axis=0), block, axis=1)
    base_y = np.minimum(ys, h - 1) + iy
    base_x = np.minimum(xs, w - 1) + ix

    best_cost = np.full((nby, nbx), np.inf)
    best = np.zeros((nby, nbx, 2), dtype=np.int64)
    for dx, dy in _search_offsets(radius):
        sy = np.clip(base_y + dy, 0, h - 1)
        sx = np.clip(base_x + dx, 0, w - 1)
        diff = np.abs(nxt[sy, sx] - prev_p).sum(axis=2)
        cost = diff.reshape(nby, block, nbx, block).sum(axis=(1, 3))
        better = cost < best_cost - 1e-12
        best_cost = np.where(better, cost, best_cost)
        best[better] = (dx, dy)
    return init + best


def compute_flow(prev: RasterImage, nxt: RasterImage,
                 cfg: FlowConfig | None = None) -> FlowField:
    """Dense flow from prev to nxt by pyramidal block matching.

    The level count is clamped so the coarsest level keeps at least 4 px per
    side. Block displacements are upsampled by 2 between levels and
    expanded to pixels by nearest-neighbor replication.

    Raises:
        DimensionMismatchError: If the frames differ in size.
    """
    cfg = cfg or FlowConfig()
    prev = np.asarray(prev, dtype=np.float64)[..., :3]
    nxt = np.asarray(nxt, dtype=np.float64)[..., :3]
    if prev.shape != nxt.shape:
        raise DimensionMismatchError(
            f"Frames differ in size: {prev.shape[:2]} vs {nxt.shape[:2]}")
    levels = min(cfg.levels, max_pyramid_levels(*prev.shape[:2]))
    pyr_prev = image_pyramid(prev, levels)
    pyr_next = image_pyramid(nxt, levels)
    block = cfg.block_size

    blocks = None
    for level in range(levels - 1, -1, -1):
        p, n = pyr_prev[level], pyr_next[level]
        h, w = p.shape[:2]
        nby, nbx = -(-h // block), -(-w // block)
        if blocks is None:
            init = np.zeros((nby, nbx, 2), dtype=np.int64)
        else:
            cy = np.minimum(np.arange(nby) // 2, blocks.shape[0] - 1)
            cx = np.minimum(np.arange(nbx) // 2, blocks.shape[1] - 1)
            init = 2 * blocks[cy][:, cx]
        blocks = _match_level(p, n, init, block, cfg.search_radius)

    h, w = prev.shape[:2]
    dense = np.repeat(np.repeat(blocks, block, axis=0), block, axis=1)[:h, :w]
    return dense.astype(np.float64)


def _load_pair(flo_dir: Path, t: int) -> tuple[FlowField, FlowField]:
    fwd = flo_dir / FORWARD_FLO.format(t)
    bwd = flo_dir / BACKWARD_FLO.format(t)
    if not fwd.is_file() or not bwd.is_file():
        raise FrameIOError(f"Missing precomputed flow {fwd.name} or {bwd.name} "
                           f"in {flo_dir}")
    return read_flo(fwd), read_flo(bwd)


def flow_for_video(frames: Sequence[RasterImage], cfg: FlowConfig | None = None,
                   flo_dir: str | Path | None = None
                   ) -> list[tuple[FlowField, FlowField]]:
    """Forward and backward flow for every consecutive frame pair.

    Element t holds (flow F_t -> F_t+1, flow F_t+1 -> F_t). With flo_dir,
    fields are read from ``forward_%05d.flo`` / ``backward_%05d.flo``
    (indexed by t) instead of being computed.

    Raises:
        FrameIOError: If a precomputed file is missing.
        DimensionMismatchError: If a precomputed field has the wrong size.
    """
    cfg = cfg or FlowConfig()
    pairs = range(len(frames) - 1)
    if flo_dir is not None:
        flo_dir = Path(flo_dir)
        result = [_load_pair(flo_dir, t) for t in pairs]
        for t, (fwd, bwd) in enumerate(result):
            for field in (fwd, bwd):
                if field.shape[:2] != frames[t].shape[:2]:
                    raise DimensionMismatchError(
                        f"Precomputed flow for pair {t} has size {field.shape[:2]}, "
                        f"frames have {frames[t].shape[:2]}")
        logger.info("Loaded %d precomputed flow pairs from %s", len(result), flo_dir)
        return result

    def one_pair(t: int) -> tuple[FlowField, FlowField]:
        return (compute_flow(frames[t], frames[t + 1], cfg),
                compute_flow(frames[t + 1], frames[t], cfg))

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        result = list(pool.map(one_pair, pairs))
    logger.info("Computed flow for %d frame pairs", len(result))
    return result
