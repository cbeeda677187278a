"""Higher-level animation effects built from the program operators."""
import logging
import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
from scipy.signal import find_peaks

from ..configuration.module_configs import EventConfig
from ..diffcomp.affine import AffineParams
from ..exceptions import RangeError
from ..program.model import MotionProgram
from .easing import ease_in_out_cubic, linear
from .operators import adj_global_motion, adj_local_motion, retime
from .queries import dominant_color, object_position
from .ranges import object_range

__all__ = [
    "stretch_time",
    "slow_in_out",
    "speed_minima",
    "retime_to_beats",
    "anticipation_follow_through",
    "motion_texture",
    "recolor",
]

logger = logging.getLogger(__name__)


def stretch_time(program: MotionProgram, object_id: int, factor: float) -> None:
    """Play an object's whole motion factor times slower (factor > 1) or faster.

    Raises:
        ValueError: If factor is not positive.
    """
    if not factor > 0:
        raise ValueError(f"Stretch factor must be > 0, got {factor}")
    first, last = object_range(program.get(object_id))
    retime(program, object_id, (first, last),
           (first, first + round((last - first) * factor)), linear)


def slow_in_out(program: MotionProgram, object_id: int,
                frame_range: Sequence[int] | None = None) -> None:
    """Ease the motion in and out over a range without changing its length."""
    span = object_range(program.get(object_id), frame_range)
    retime(program, object_id, span, span, ease_in_out_cubic)


def speed_minima(program: MotionProgram, object_id: int) -> list[int]:
    """Interior frames where the object's speed has a local minimum."""
    obj = program.get(object_id)
    first, last = object_range(obj)
    frames = [f for f in range(first, last + 1) if f in obj.keyframes]
    if len(frames) < 3:
        return []
    positions = np.array([object_position(program, obj.keyframes[f].params) for f in frames])
    speed = np.linalg.norm(np.gradient(positions, axis=0), axis=1)
    peaks, _ = find_peaks(-speed)
    return [frames[i] for i in peaks]


def retime_to_beats(program: MotionProgram, object_id: int, beats: Sequence[int]) -> None:
    """Move successive speed minima of an object's motion onto beat frames.

    Each stretch of motion between aligned extrema is retimed linearly;
    extrema beyond the last beat (or beats beyond the last extremum) are
    ignored.

    Raises:
        RangeError: If the beats are not increasing or a beat does not lie
            after the object's first frame.
    """
    extrema = speed_minima(program, object_id)
    start, _ = object_range(program.get(object_id))
    shift = 0
    for extremum, beat in zip(extrema, beats):
        beat = int(beat)
        if beat <= start:
            raise RangeError(f"Beat {beat} does not follow frame {start}")
        moved = extremum + shift
        retime(program, object_id, (start, moved), (start, beat), linear)
        shift += beat - moved
        start = beat
    logger.debug("Object %d: aligned %d extrema to beats", object_id,
                 min(len(extrema), len(beats)))


def anticipation_follow_through(program: MotionProgram, object_id: int,
                                frame_range: Sequence[int] | None = None,
                                amplitude: float = 5.0) -> None:
    """Pull back before a move and overshoot after it.

    The object is offset by -amplitude * sin(2 pi u) pixels along the
    direction of its net displacement over the range.
    """
    obj = program.get(object_id)
    first, last = object_range(obj, frame_range)
    displacement = (object_position(program, obj.keyframes[last].params)
                    - object_position(program, obj.keyframes[first].params))
    length = float(np.linalg.norm(displacement))
    if length == 0.0:
        logger.debug("Object %d does not move over %d..%d", object_id, first, last)
        return
    direction = displacement / length

    def offset(u: float) -> AffineParams:
        d = -amplitude * math.sin(2.0 * math.pi * u) * direction
        return AffineParams.translation(float(d[0]), float(d[1]))

    adj_global_motion(program, object_id, offset, (first, last))


def motion_texture(program: MotionProgram, object_id: int,
                   kind: Literal["wobble", "pulse"] = "wobble",
                   frame_range: Sequence[int] | None = None,
                   amplitude: float = 10.0, period: float = 12.0) -> None:
    """Add a periodic local perturbation to an object.

    Args:
        kind: "wobble" rotates by amplitude degrees peak; "pulse" scales by
            1 + amplitude * sin(...), so amplitude must lie in (-1, 1).
        period: Frames per oscillation.

    Raises:
        ValueError: On an unknown kind, a non-positive period or a pulse
            amplitude that would collapse the object.
    """
    if kind not in ("wobble", "pulse"):
        raise ValueError(f"Unknown texture '{kind}'; expected 'wobble' or 'pulse'")
    if not period > 0:
        raise ValueError(f"period must be > 0, got {period}")
    if kind == "pulse" and not abs(amplitude) < 1:
        raise ValueError(f"Pulse amplitude must lie in (-1, 1), got {amplitude}")
    first, last = object_range(program.get(object_id), frame_range)

    def texture(u: float) -> AffineParams:
        wave = math.sin(2.0 * math.pi * u * (last - first) / period)
        if kind == "wobble":
            return AffineParams(theta=math.radians(amplitude) * wave)
        return AffineParams(sx=1.0 + amplitude * wave, sy=1.0 + amplitude * wave)

    adj_local_motion(program, object_id, texture, (first, last))


def recolor(program: MotionProgram, object_id: int, rgb: Sequence[float],
            cfg: EventConfig | None = None) -> None:
    """Shift the dominant color cluster of an object's image onto rgb.

    Pixels of the cluster move by (rgb - cluster center), keeping their
    shading; other pixels are untouched.
    """
    cfg = cfg or EventConfig()
    obj = program.get(object_id)
    center, members = dominant_color(obj.canonical, cfg.color_clusters)
    image = obj.canonical.copy()
    image[members, :3] = np.clip(image[members, :3] + (np.asarray(rgb, dtype=np.float64)
                                                       - center), 0.0, 1.0)
    program.set_canonical(object_id, image)
