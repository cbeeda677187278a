"""Operators that edit a motion program in place.

Every operator mutates through the program's guarded methods, so a program
is only ever edited from the thread that first edited it. Transforms handed
to the motion adjusters are either fixed AffineParams or functions of the
normalized position u in [0, 1] of a frame within the edited range.
"""
import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from typing import Any, Final, TypeAlias

import numpy as np

from ..configuration.module_configs import EventConfig
from ..diffcomp.affine import AffineParams, image_center
from ..exceptions import RangeError
from ..program.model import Keyframe, MotionProgram, ProgramObject, as_canonical
from .easing import EaseFn, check_ease, hold_of, linear
from .queries import boundary_contact, event_query, object_support
from .ranges import object_range, range_fraction, resolve_range

__all__ = [
    "XformFn",
    "retime",
    "adj_local_motion",
    "adj_global_motion",
    "change_appearance",
    "collision_preserving_change",
    "create_object",
    "delete_object",
    "copy_motion",
    "set_transforms",
]

logger = logging.getLogger(__name__)

XformFn: TypeAlias = Callable[[float], AffineParams] | AffineParams

_SNAP: Final[float] = 1e-9


def _as_fn(xform: XformFn) -> Callable[[float], AffineParams]:
    if isinstance(xform, AffineParams):
        return lambda u: xform
    return xform


def _canvas_center(program: MotionProgram) -> tuple[float, float]:
    width, height = program.canvas
    return (width - 1) / 2.0, (height - 1) / 2.0


def _settle_ranks(program: MotionProgram) -> None:
    tied = program.frames_with_rank_ties()
    if tied:
        program.rerank_z(tied)


def _sample(obj: ProgramObject, s: float) -> tuple[AffineParams, int, bool]:
    """Params at fractional source frame s; z and visibility from the nearest frame."""
    lo = math.floor(s)
    frac = s - lo
    if frac <= _SNAP or lo + 1 not in obj.keyframes:
        k = obj.keyframes[lo]
        return k.params, k.z, k.visible
    a, b = obj.keyframes[lo], obj.keyframes[lo + 1]
    nearest = a if frac < 0.5 else b
    return a.params.lerp(b.params, frac), nearest.z, nearest.visible


def retime(program: MotionProgram, object_id: int, src_range: Sequence[int],
           tgt_range: Sequence[int], ease: EaseFn = linear) -> None:
    """Remap an object's motion over src_range onto tgt_range.

    Target frame i of n plays source time src_first + ease(i / n) * (source
    length), interpolating params between source frames. An ease built by
    step(k) holds every k-th sample for k frames. Keyframes before the
    source range move with its start and those after it move with its end,
    so the rest of the motion is kept; keyframes pushed before frame 0 are
    dropped and the program grows if the motion runs past its end.

    Raises:
        UnknownObjectError: If the object does not exist.
        RangeError: If the source range is not covered by keyframes or the
            target range is reversed or starts before frame 0.
        NonMonotoneEaseError: If ease is not a monotone map of [0, 1] onto itself.
    """
    program._restrict_to_owner_thread()
    check_ease(ease)
    obj = program.get(object_id)
    src_first, src_last = object_range(obj, src_range)
    tgt_first, tgt_last = int(tgt_range[0]), int(tgt_range[1])
    if tgt_first > tgt_last or tgt_first < 0:
        raise RangeError(f"Invalid target range {tgt_first}..{tgt_last}")

    src_len, tgt_len = src_last - src_first, tgt_last - tgt_first
    hold = hold_of(ease)
    retimed: dict[int, Keyframe] = {}
    for f, k in obj.keyframes.items():
        if f < src_first:
            g = f + tgt_first - src_first
        elif f > src_last:
            g = f + tgt_last - src_last
        else:
            continue
        if g >= 0:
            retimed[g] = Keyframe(g, k.params, k.z, k.visible)
    for i in range(tgt_len + 1):
        u = (i - i % hold) / tgt_len if tgt_len else 0.0
        s = src_first + ease(u) * src_len
        if abs(s - round(s)) <= _SNAP:
            s = round(s)
        params, z, visible = _sample(obj, min(max(s, src_first), src_last))
        retimed[tgt_first + i] = Keyframe(tgt_first + i, params, z, visible)

    if max(retimed) >= program.num_frames:
        program.set_num_frames(max(retimed) + 1)
    program.replace_keyframes(object_id, [retimed[f] for f in sorted(retimed)])
    _settle_ranks(program)
    logger.debug("Retimed object %d: %d..%d -> %d..%d", object_id, src_first, src_last,
                 tgt_first, tgt_last)


def _adjust(program: MotionProgram, object_id: int, xform: XformFn,
            frame_range: Sequence[int] | None,
            combine: Callable[[AffineParams, AffineParams, ProgramObject], AffineParams]
            ) -> None:
    program._restrict_to_owner_thread()
    obj = program.get(object_id)
    span = resolve_range(program, frame_range)
    fn = _as_fn(xform)
    for f in obj.frames:
        if not span[0] <= f <= span[1]:
            continue
        x = fn(range_fraction(f, span))
        if x.is_identity():
            continue
        k = obj.keyframes[f]
        program.set_keyframe(object_id, Keyframe(f, combine(k.params, x, obj), k.z, k.visible))


def adj_local_motion(program: MotionProgram, object_id: int, xform: XformFn,
                     frame_range: Sequence[int] | None = None) -> None:
    """Post-multiply each frame's transform by xform in canonical coordinates.

    The adjustment acts about the canonical image's center, so a rotation
    spins the object in place wherever it is.

    Raises:
        UnknownObjectError: If the object does not exist.
        RangeError: If the range leaves the program.
        SingularTransformError: If a result cannot be decomposed.
    """
    center = _canvas_center(program)

    def local(params: AffineParams, x: AffineParams, obj: ProgramObject) -> AffineParams:
        anchor = image_center(obj.canonical.shape)
        m = params.matrix(anchor, center) @ x.matrix(anchor, anchor)
        return AffineParams.from_matrix(m, anchor, center)

    _adjust(program, object_id, xform, frame_range, local)


def adj_global_motion(program: MotionProgram, object_id: int, xform: XformFn,
                      frame_range: Sequence[int] | None = None) -> None:
    """Pre-multiply each frame's transform by xform in frame coordinates.

    The adjustment acts about the canvas center; pure translations shift
    the translation parameters directly.

    Raises:
        UnknownObjectError: If the object does not exist.
        RangeError: If the range leaves the program.
        SingularTransformError: If a result cannot be decomposed.
    """
    center = _canvas_center(program)

    def world(params: AffineParams, x: AffineParams, obj: ProgramObject) -> AffineParams:
        if x.replace(tx=0.0, ty=0.0).is_identity():
            return params.replace(tx=params.tx + x.tx, ty=params.ty + x.ty)
        anchor = image_center(obj.canonical.shape)
        m = x.matrix(center, center) @ params.matrix(anchor, center)
        return AffineParams.from_matrix(m, anchor, center)

    _adjust(program, object_id, xform, frame_range, world)


def change_appearance(program: MotionProgram, object_id: int, image: Any,
                      frame_range: Sequence[int] | None = None) -> int:
    """Swap an object's canonical image, keeping its transforms.

    A range short of the object's whole lifetime splits the object: its
    keyframes inside the range move to a new object with the new image.

    Returns:
        Id of the object that now carries the image.

    Raises:
        EmptyImageError: If the image has no opaque pixels.
        UnknownObjectError: If the object does not exist.
        RangeError: If the range holds none of the object's keyframes.
    """
    program._restrict_to_owner_thread()
    canonical = as_canonical(image)
    obj = program.get(object_id)
    first, last = resolve_range(program, frame_range)
    inside = [f for f in obj.frames if first <= f <= last]
    if not inside:
        raise RangeError(f"Object {object_id} has no keyframes in {first}..{last}")
    if len(inside) == len(obj.keyframes):
        program.set_canonical(object_id, canonical)
        return object_id
    new_id = program.next_id()
    moved = [obj.keyframes[f] for f in inside]
    program.replace_keyframes(object_id, [k for f, k in sorted(obj.keyframes.items())
                                          if not first <= f <= last])
    program.add_object(ProgramObject(new_id, canonical, moved))
    logger.info("Split object %d at %d..%d into new object %d", object_id, first, last,
                new_id)
    return new_id


def _blend_offsets(offsets: Mapping[int, np.ndarray], window: int
                   ) -> tuple[list[int], np.ndarray]:
    """Anchor frames and offsets, with zero anchors window + 1 frames outside."""
    anchors: dict[int, np.ndarray] = {}
    keys = sorted(offsets)
    for i, f in enumerate(keys):
        anchors[f] = offsets[f]
        before, after = f - window - 1, f + window + 1
        if i == 0 or keys[i - 1] < before:
            anchors.setdefault(before, np.zeros(2))
        if i == len(keys) - 1 or keys[i + 1] > after:
            anchors.setdefault(after, np.zeros(2))
    frames = sorted(anchors)
    return frames, np.array([anchors[f] for f in frames])


def collision_preserving_change(program: MotionProgram, object_id: int, image: Any,
                                cfg: EventConfig | None = None) -> None:
    """Change an object's appearance and nudge it so its collisions still touch.

    At every collision frame the object is translated so the new
    appearance's boundary point nearest the other participant lands on the
    original contact point. The offsets fade linearly to zero over
    cfg.blend_window frames around each collision.

    Raises:
        EmptyImageError: If the image has no opaque pixels.
        UnknownObjectError: If the object does not exist.
    """
    cfg = cfg or EventConfig()
    program._restrict_to_owner_thread()
    canonical = as_canonical(image)
    events = event_query(program, object_id, "collision", cfg=cfg)
    program.set_canonical(object_id, canonical)
    if not events:
        return
    obj = program.get(object_id)

    offsets: dict[int, np.ndarray] = {}
    for event in events:
        f = event.frame
        other = program.get(event.others[0])
        contact = boundary_contact(object_support(program, obj, f),
                                   object_support(program, other, f))
        if contact is None:
            continue
        offsets[f] = np.asarray(event.contacts[0]) - np.asarray(contact[1])
    if not offsets:
        return
    anchor_frames, anchor_offsets = _blend_offsets(offsets, cfg.blend_window)
    lifetime = object_range(obj)

    def nudge(u: float) -> AffineParams:
        f = round(lifetime[0] + u * (lifetime[1] - lifetime[0]))
        d = np.array([np.interp(f, anchor_frames, anchor_offsets[:, i], left=0.0, right=0.0)
                      for i in range(2)])
        local = np.linalg.solve(obj.keyframes[f].params.linear(), d)
        return AffineParams.translation(float(local[0]), float(local[1]))

    adj_local_motion(program, object_id, nudge, lifetime)
    logger.info("Object %d: preserved %d collisions", object_id, len(offsets))


def create_object(program: MotionProgram, image: Any, frames: Iterable[int],
                  params: AffineParams | Mapping[int, AffineParams] | None = None,
                  object_id: int | None = None) -> int:
    """Add an object shown in the given frames, in front of everything.

    Args:
        program: Program to edit.
        image: RGBA canonical image.
        frames: Frames the object appears in.
        params: One transform for every frame, or one per frame; identity
            (centered on the canvas) by default.
        object_id: Id to use; the next free id by default.

    Returns:
        The new object's id.

    Raises:
        EmptyImageError: If the image has no opaque pixels.
        IdCollisionError: If object_id is taken.
        RangeError: If a frame is outside the program.
    """
    program._restrict_to_owner_thread()
    canonical = as_canonical(image)
    object_id = program.next_id() if object_id is None else int(object_id)
    keyframes = []
    for f in sorted(set(int(f) for f in frames)):
        if not 0 <= f < program.num_frames:
            raise RangeError(f"Frame {f} outside [0, {program.num_frames})")
        if isinstance(params, Mapping):
            placed = params[f]
        else:
            placed = params or AffineParams()
        keyframes.append(Keyframe(f, placed, len(program.visible_at(f))))
    program.add_object(ProgramObject(object_id, canonical, keyframes))
    return object_id


def delete_object(program: MotionProgram, object_id: int) -> None:
    """Remove an object and close the gaps it leaves in the depth ranks.

    Raises:
        UnknownObjectError: If the object does not exist.
    """
    removed = program.remove_object(object_id)
    program.rerank_z(f for f in removed.frames if f < program.num_frames)


def copy_motion(program: MotionProgram, src_id: int, dst_id: int) -> None:
    """Give dst the keyframes of src.

    dst takes the depth of src at every frame; the tie is broken by object id.

    Raises:
        UnknownObjectError: If either object does not exist.
    """
    program._restrict_to_owner_thread()
    src = program.get(src_id)
    program.get(dst_id)
    program.replace_keyframes(dst_id, [Keyframe(f, k.params, k.z, k.visible)
                                       for f, k in sorted(src.keyframes.items())])
    _settle_ranks(program)


def set_transforms(program: MotionProgram, object_id: int,
                   params: Mapping[int, AffineParams]) -> None:
    """Set the transform of an object at the given frames.

    Existing keyframes keep their depth and visibility; new ones are
    placed in front.

    Raises:
        UnknownObjectError: If the object does not exist.
        RangeError: If a frame is outside the program.
    """
    program._restrict_to_owner_thread()
    obj = program.get(object_id)
    for f, placed in sorted(params.items()):
        if not 0 <= f < program.num_frames:
            raise RangeError(f"Frame {f} outside [0, {program.num_frames})")
        old = obj.keyframes.get(f)
        if old is None:
            keyframe = Keyframe(f, placed, len(program.visible_at(f)))
        else:
            keyframe = Keyframe(f, placed, old.z, old.visible)
        program.set_keyframe(object_id, keyframe)
