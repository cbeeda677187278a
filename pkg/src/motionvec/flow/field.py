"""Flow fields: Middlebury .flo IO and mask advection."""
from pathlib import Path
from typing import Final, TypeAlias

import numpy as np
from numpy.typing import NDArray

from ..exceptions import FrameIOError, ParseError
from ..imaging.raster import BinaryMask, check_same_size

__all__ = ["FlowField", "FLO_MAGIC", "read_flo", "write_flo", "advect_mask",
           "round_half_up"]

FlowField: TypeAlias = NDArray[np.float64]
"""(H, W, 2) per-pixel (dx, dy) displacement in pixels."""

FLO_MAGIC: Final[float] = 202021.25  # b"PIEH" read as little-endian float32


def read_flo(path: str | Path) -> FlowField:
    """Read a Middlebury .flo file.

    Raises:
        FrameIOError: If the file cannot be read.
        ParseError: If the header or payload is malformed.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise FrameIOError(f"Cannot read flow file {path}: {e}") from e
    if len(raw) < 12:
        raise ParseError(f"Flow file {path} is truncated", field="header")
    magic = np.frombuffer(raw[:4], dtype="<f4")[0]
    if magic != np.float32(FLO_MAGIC):
        raise ParseError(f"Flow file {path} lacks the PIEH magic", field="magic")
    width, height = (int(v) for v in np.frombuffer(raw[4:12], dtype="<i4"))
    if width <= 0 or height <= 0:
        raise ParseError(f"Flow file {path} has invalid size {width}x{height}",
                         field="size")
    expected = 12 + width * height * 2 * 4
    if len(raw) != expected:
        raise ParseError(f"Flow file {path} has {len(raw)} bytes, expected {expected}",
                         field="data")
    data = np.frombuffer(raw[12:], dtype="<f4").reshape(height, width, 2)
    flow = data.astype(np.float64)
    if not np.all(np.isfinite(flow)):
        raise ParseError(f"Flow file {path} holds non-finite vectors", field="data")
    return flow


def write_flo(path: str | Path, flow: FlowField) -> None:
    """Write a (H, W, 2) field as a Middlebury .flo file."""
    flow = np.asarray(flow, dtype=np.float64)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"Flow must have shape (H, W, 2), got {flow.shape}")
    height, width = flow.shape[:2]
    payload = (np.array([FLO_MAGIC], dtype="<f4").tobytes()
               + np.array([width, height], dtype="<i4").tobytes()
               + flow.astype("<f4").tobytes())
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(payload)
    except OSError as e:
        raise FrameIOError(f"Cannot write flow file {path}: {e}") from e


def round_half_up(a: np.ndarray) -> NDArray[np.int64]:
    return np.floor(np.asarray(a, dtype=np.float64) + 0.5).astype(np.int64)


def advect_mask(mask: BinaryMask, flow: FlowField) -> BinaryMask:
    """Move every set pixel p to round(p + flow(p)); drop pixels leaving the frame.

    Raises:
        DimensionMismatchError: If mask and flow differ in size.
    """
    mask = np.asarray(mask, dtype=bool)
    check_same_size(mask, flow, "Mask and flow")
    ys, xs = np.nonzero(mask)
    nx = round_half_up(xs + flow[ys, xs, 0])
    ny = round_half_up(ys + flow[ys, xs, 1])
    h, w = mask.shape
    inside = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
    out = np.zeros_like(mask)
    out[ny[inside], nx[inside]] = True
    return out
