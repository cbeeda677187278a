"""Rendering programs back to frames and measuring reconstruction error."""
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import NDArray

from ..configuration.pipeline_config import worker_count
from ..diffcomp.placement import PlacementSet, SourceElement
from ..diffcomp.render import composite_hard
from ..exceptions import DimensionMismatchError, FrameOutOfRangeError
from ..imaging.raster import RasterImage
from .model import MotionProgram

__all__ = ["placements_at", "render_frame", "render_video",
           "reconstruction_error", "reconstruction_heatmap"]

logger = logging.getLogger(__name__)


def placements_at(program: MotionProgram, t: int) -> PlacementSet:
    """Visible objects of frame t as a placement set (z = integer rank)."""
    elements = [SourceElement(o.object_id, o.canonical, o.keyframes[t].params,
                              float(o.keyframes[t].z))
                for o in sorted(program.visible_at(t),
                                key=lambda o: (o.keyframes[t].z, o.object_id))]
    return PlacementSet(elements, program.canvas)


def render_frame(program: MotionProgram, t: int) -> RasterImage:
    """Hard composite of frame t over the background.

    Raises:
        FrameOutOfRangeError: If t is outside [0, num_frames).
    """
    if not 0 <= t < program.num_frames:
        raise FrameOutOfRangeError(f"Frame {t} outside [0, {program.num_frames})")
    width, height = program.canvas
    return composite_hard(placements_at(program, t),
                          program.background.render(width, height))


def render_video(program: MotionProgram) -> list[RasterImage]:
    """Every frame, rendered in a thread pool."""
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(lambda t: render_frame(program, t),
                             range(program.num_frames)))


def _check_frames(program: MotionProgram, frames: Sequence[np.ndarray]) -> None:
    if len(frames) != program.num_frames:
        raise DimensionMismatchError(f"Program has {program.num_frames} frames, "
                                     f"got {len(frames)}")
    width, height = program.canvas
    for t, frame in enumerate(frames):
        if np.asarray(frame).shape[:2] != (height, width):
            raise DimensionMismatchError(
                f"Frame {t} is {np.asarray(frame).shape[:2]}, program canvas is "
                f"{(height, width)}")


def reconstruction_heatmap(program: MotionProgram, frames: Sequence[np.ndarray],
                           t: int) -> NDArray[np.float64]:
    """Per-pixel RMS over RGB of render minus frame t, in [0, 1].

    Raises:
        DimensionMismatchError: If frame count or size differ from the program.
        FrameOutOfRangeError: If t is outside the program.
    """
    _check_frames(program, frames)
    diff = render_frame(program, t) - np.asarray(frames[t], dtype=np.float64)[..., :3]
    return np.sqrt(np.mean(diff ** 2, axis=-1))


def reconstruction_error(program: MotionProgram, frames: Sequence[np.ndarray]
                         ) -> tuple[list[float], float]:
    """RMS RGB error per frame and its mean over frames.

    Raises:
        DimensionMismatchError: If frame count or size differ from the program.
    """
    _check_frames(program, frames)
    rendered = render_video(program)
    per_frame = []
    for ours, theirs in zip(rendered, frames):
        diff = ours - np.asarray(theirs, dtype=np.float64)[..., :3]
        per_frame.append(float(np.sqrt(np.mean(diff ** 2))))
    mean = float(np.mean(per_frame))
    logger.info("Reconstruction error %.5f over %d frames", mean, len(per_frame))
    return per_frame, mean
