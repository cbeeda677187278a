"""Inclusive frame ranges and their validation."""
from collections.abc import Sequence
from typing import TypeAlias

from ..exceptions import RangeError
from ..program.model import MotionProgram, ProgramObject

__all__ = ["FrameRange", "resolve_range", "object_range", "range_fraction"]

FrameRange: TypeAlias = tuple[int, int]


def resolve_range(program: MotionProgram, frame_range: Sequence[int] | None) -> FrameRange:
    """(first, last) inclusive; None means the whole program.

    Raises:
        RangeError: If the range is reversed or leaves [0, num_frames).
    """
    if frame_range is None:
        return 0, program.num_frames - 1
    if len(frame_range) != 2:
        raise RangeError(f"A frame range needs two frames, got {list(frame_range)}")
    first, last = int(frame_range[0]), int(frame_range[1])
    if first > last:
        raise RangeError(f"Frame range {first}..{last} is reversed")
    if first < 0 or last >= program.num_frames:
        raise RangeError(f"Frame range {first}..{last} outside [0, {program.num_frames})")
    return first, last


def object_range(obj: ProgramObject, frame_range: Sequence[int] | None = None) -> FrameRange:
    """The object's keyframe span, or frame_range checked against it.

    Raises:
        RangeError: If the object has no keyframes or the range is not
            covered by them.
    """
    if not obj.keyframes:
        raise RangeError(f"Object {obj.object_id} has no keyframes")
    span = (obj.frames[0], obj.frames[-1])
    if frame_range is None:
        return span
    first, last = int(frame_range[0]), int(frame_range[1])
    if first > last:
        raise RangeError(f"Frame range {first}..{last} is reversed")
    missing = [f for f in range(first, last + 1) if f not in obj.keyframes]
    if missing:
        raise RangeError(f"Object {obj.object_id} has no keyframes for frames "
                         f"{missing[0]}..{missing[-1]} of {first}..{last}")
    return first, last


def range_fraction(frame: int, frame_range: FrameRange) -> float:
    """Position u in [0, 1] of a frame within a range (0 for one-frame ranges)."""
    first, last = frame_range
    return 0.0 if last == first else (frame - first) / (last - first)
