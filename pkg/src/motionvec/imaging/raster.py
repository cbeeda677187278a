"""Raster and mask types plus PNG frame IO.

Images are float64 numpy arrays of shape (H, W, C) with C = 3 (RGB) or
C = 4 (RGBA) and values in [0, 1]. Masks are boolean arrays of shape (H, W).
Frame sequences on disk are numbered ``frame_%05d.png`` files.
"""
import logging
import re
from collections.abc import Sequence
from pathlib import Path
from typing import Final, TypeAlias

import numpy as np
from numpy.typing import NDArray
from PIL import Image

from ..exceptions import DimensionMismatchError, EmptyMaskError, FrameIOError

__all__ = [
    "RasterImage",
    "BinaryMask",
    "FRAME_PATTERN",
    "as_raster",
    "check_same_size",
    "mask_area",
    "mask_bbox",
    "mask_centroid",
    "read_png",
    "write_png",
    "read_frames",
    "write_frame",
    "write_frames",
    "read_label_png",
    "write_label_png",
]

logger = logging.getLogger(__name__)

RasterImage: TypeAlias = NDArray[np.float64]
BinaryMask: TypeAlias = NDArray[np.bool_]

FRAME_PATTERN: Final[str] = "frame_{:05d}.png"
_FRAME_RE: Final[re.Pattern[str]] = re.compile(r"^frame_(\d+)\.png$")


def as_raster(img: np.ndarray) -> RasterImage:
    """Validate an image and return it as a float64 array.

    Raises:
        ValueError: If the array is not (H, W, 3|4) or holds values outside
            [0, 1] or non-finite values.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] not in (3, 4):
        raise ValueError(f"Expected an (H, W, 3|4) image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Image holds non-finite values")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("Image values must lie in [0, 1]")
    return arr


def check_same_size(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    """Raise DimensionMismatchError unless a and b share height and width."""
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatchError(
            f"{what} differ in size: {a.shape[:2]} vs {b.shape[:2]}")


def mask_area(mask: BinaryMask) -> int:
    """Number of set pixels."""
    return int(np.count_nonzero(mask))


def mask_bbox(mask: BinaryMask) -> tuple[int, int, int, int]:
    """Inclusive (x0, y0, x1, y1) of the set pixels.

    Raises:
        EmptyMaskError: If the mask is empty.
    """
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise EmptyMaskError("Empty mask has no bounding box")
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


def mask_centroid(mask: BinaryMask) -> NDArray[np.float64]:
    """Mean (x, y) of the set pixels.

    Raises:
        EmptyMaskError: If the mask is empty.
    """
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise EmptyMaskError("Empty mask has no centroid")
    return np.array([xs.mean(), ys.mean()])


def read_png(path: str | Path, *, keep_alpha: bool = False) -> RasterImage:
    """Decode an 8-bit PNG into a [0, 1] float image.

    Args:
        path: File to read.
        keep_alpha: Return RGBA instead of RGB.

    Raises:
        FrameIOError: If the file cannot be opened or decoded.
    """
    try:
        with Image.open(path) as im:
            im = im.convert("RGBA" if keep_alpha else "RGB")
            data = np.asarray(im, dtype=np.float64) / 255.0
    except OSError as e:
        raise FrameIOError(f"Cannot read image {path}: {e}") from e
    return data


def write_png(path: str | Path, img: np.ndarray) -> None:
    """Encode a [0, 1] float image (RGB or RGBA) as an 8-bit PNG.

    Raises:
        FrameIOError: If the file cannot be written.
    """
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    data = np.round(arr * 255.0).astype(np.uint8)
    mode = "RGBA" if data.shape[2] == 4 else "RGB"
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(data, mode=mode).save(path, format="PNG")
    except OSError as e:
        raise FrameIOError(f"Cannot write image {path}: {e}") from e


def _numbered_pngs(directory: Path) -> list[tuple[int, Path]]:
    found = []
    for entry in directory.iterdir():
        match = _FRAME_RE.match(entry.name)
        if match and entry.is_file():
            found.append((int(match.group(1)), entry))
    return sorted(found)


def read_frames(directory: str | Path) -> list[RasterImage]:
    """Read every ``frame_%05d.png`` in a directory, in numeric order.

    Raises:
        FrameIOError: If the directory is missing, holds no frames, or
            frames differ in size.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FrameIOError(f"Frame directory does not exist: {directory}")
    entries = _numbered_pngs(directory)
    if not entries:
        raise FrameIOError(f"No frame_%05d.png files found in {directory}")
    frames = [read_png(p) for _, p in entries]
    for (_, p), frame in zip(entries, frames):
        if frame.shape != frames[0].shape:
            raise FrameIOError(f"Frame {p} has size {frame.shape[:2]}, "
                               f"expected {frames[0].shape[:2]}")
    logger.info("Read %d frames of size %dx%d from %s", len(frames),
                frames[0].shape[1], frames[0].shape[0], directory)
    return frames


def write_frame(directory: str | Path, index: int, img: np.ndarray) -> Path:
    """Write one frame as ``frame_%05d.png`` and return its path."""
    path = Path(directory) / FRAME_PATTERN.format(index)
    write_png(path, img)
    return path


def write_frames(directory: str | Path, frames: Sequence[np.ndarray]) -> list[Path]:
    """Write a whole sequence, numbering from 0."""
    return [write_frame(directory, i, f) for i, f in enumerate(frames)]


def read_label_png(path: str | Path) -> NDArray[np.int64]:
    """Read a 16-bit label image (0 = background).

    Raises:
        FrameIOError: If the file cannot be decoded as a single-channel image.
    """
    try:
        with Image.open(path) as im:
            if im.mode not in ("I", "I;16", "I;16B", "L"):
                raise FrameIOError(f"Label image {path} must be single-channel, "
                                   f"got mode {im.mode}")
            labels = np.asarray(im).astype(np.int64)
    except OSError as e:
        raise FrameIOError(f"Cannot read label image {path}: {e}") from e
    return labels


def write_label_png(path: str | Path, labels: np.ndarray) -> None:
    """Write an integer label image as a 16-bit PNG.

    Raises:
        ValueError: If a label does not fit in 16 bits.
        FrameIOError: If the file cannot be written.
    """
    arr = np.asarray(labels)
    if arr.size and (arr.min() < 0 or arr.max() > 65535):
        raise ValueError("Labels must lie in [0, 65535]")
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(arr.astype(np.uint16), mode="I;16").save(path, format="PNG")
    except OSError as e:
        raise FrameIOError(f"Cannot write label image {path}: {e}") from e
