"""Read-only queries over a motion program: per-frame properties and events."""
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Final, Literal

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage
from scipy.signal import find_peaks
from sklearn.cluster import KMeans

from ..configuration.module_configs import EventConfig
from ..diffcomp.affine import AffineParams, image_center
from ..diffcomp.render import VISIBILITY_THRESHOLD, warp_premultiplied
from ..imaging.raster import BinaryMask
from ..program.model import MotionProgram, ProgramObject
from .ranges import FrameRange, resolve_range

__all__ = [
    "PROPERTIES",
    "EVENT_KINDS",
    "PropertySeries",
    "Event",
    "prop_query",
    "event_query",
    "dominant_color",
    "object_position",
    "object_support",
    "boundary_contact",
]

logger = logging.getLogger(__name__)

PROPERTIES: Final[tuple[str, ...]] = ("all", "color", "position", "size", "velocity")
EVENT_KINDS: Final[tuple[str, ...]] = ("held", "collision", "motionCycle")

_ALPHA_SOLID: Final[float] = 0.5
_MIN_SPEED: Final[float] = 1e-6


@dataclass
class PropertySeries:
    """One value per frame of a property.

    Attributes:
        object_id: Queried object; None for prop "all".
        prop: Property name.
        frames: Frames with a value, ascending.
        values: Per frame: RGB triple (color), (x, y) (position), (w, h)
            (size), (dx, dy) per frame (velocity), or the ids of the
            objects present (all).
    """
    object_id: int | None
    prop: str
    frames: list[int] = field(default_factory=list)
    values: list[Any] = field(default_factory=list)

    def at(self, frame: int) -> Any:
        return self.values[self.frames.index(frame)]


@dataclass
class Event:
    """A detected event.

    Attributes:
        kind: "held", "collision" or "motionCycle".
        frames: Frames the event spans.
        frame: Representative frame (the closest contact for collisions).
        others: Other participants (collisions).
        contacts: Nearest-point pair ((x, y) on the object, (x, y) on the
            other object) at the representative frame (collisions).
        period: Cycle length in frames (motionCycle).
    """
    kind: str
    frames: tuple[int, ...]
    frame: int
    others: tuple[int, ...] = ()
    contacts: tuple[tuple[float, float], ...] = ()
    period: int | None = None


def dominant_color(image: np.ndarray, clusters: int = 4, seed: int = 0
                   ) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Center of the largest color cluster of the opaque pixels.

    Returns:
        (RGB center, mask of the pixels in that cluster).
    """
    opaque = image[..., 3] > _ALPHA_SOLID
    if not np.any(opaque):
        opaque = image[..., 3] > 0
    pixels = image[opaque][:, :3]
    distinct = len(np.unique(pixels, axis=0))
    k = max(1, min(clusters, distinct))
    km = KMeans(n_clusters=k, n_init=4, random_state=seed).fit(pixels)
    counts = np.bincount(km.labels_, minlength=k)
    best = int(np.argmax(counts))
    members = np.zeros(opaque.shape, dtype=bool)
    members[opaque] = km.labels_ == best
    return np.clip(km.cluster_centers_[best], 0.0, 1.0), members


def object_position(program: MotionProgram, params: AffineParams) -> NDArray[np.float64]:
    """Frame coordinates of the transformed canonical center."""
    width, height = program.canvas
    return np.array([(width - 1) / 2.0 + params.tx, (height - 1) / 2.0 + params.ty])


def _frame_matrix(program: MotionProgram, obj: ProgramObject, params: AffineParams
                  ) -> NDArray[np.float64]:
    width, height = program.canvas
    return params.matrix(image_center(obj.canonical.shape),
                         ((width - 1) / 2.0, (height - 1) / 2.0))


def _size(program: MotionProgram, obj: ProgramObject, params: AffineParams) -> tuple[float, float]:
    h, w = obj.canonical.shape[:2]
    corners = np.array([[-0.5, -0.5], [w - 0.5, -0.5], [-0.5, h - 0.5], [w - 0.5, h - 0.5]])
    m = _frame_matrix(program, obj, params)
    mapped = corners @ m[:2, :2].T + m[:2, 2]
    extent = mapped.max(axis=0) - mapped.min(axis=0)
    return float(extent[0]), float(extent[1])


def object_support(program: MotionProgram, obj: ProgramObject, frame: int) -> BinaryMask:
    """Pixels the object covers (alpha > 0.5) when rendered alone at frame."""
    width, height = program.canvas
    m = _frame_matrix(program, obj, obj.keyframes[frame].params)
    return warp_premultiplied(obj.canonical, m, (height, width))[..., 3] > VISIBILITY_THRESHOLD


def _velocities(program: MotionProgram, obj: ProgramObject) -> dict[int, NDArray[np.float64]]:
    """Central differences of position; one-sided at timeline ends and gaps."""
    pos = {f: object_position(program, k.params) for f, k in obj.keyframes.items()}
    out = {}
    for f in pos:
        before, after = pos.get(f - 1), pos.get(f + 1)
        if before is not None and after is not None:
            out[f] = (after - before) / 2.0
        elif after is not None:
            out[f] = after - pos[f]
        elif before is not None:
            out[f] = pos[f] - before
        else:
            out[f] = np.zeros(2)
    return out


def prop_query(program: MotionProgram, object_id: int | None, prop: str,
               frame_range: FrameRange | None = None,
               cfg: EventConfig | None = None) -> PropertySeries:
    """A property of one object for every frame it is visible in range.

    With prop "all" the object id is ignored and each frame's value is the
    sorted ids of the objects visible in it.

    Raises:
        UnknownObjectError: If the object does not exist.
        RangeError: If the range is empty or outside the program.
        ValueError: If prop is unknown.
    """
    if prop not in PROPERTIES:
        raise ValueError(f"Unknown property '{prop}'; expected one of {PROPERTIES}")
    cfg = cfg or EventConfig()
    first, last = resolve_range(program, frame_range)
    if prop == "all":
        series = PropertySeries(None, prop)
        for f in range(first, last + 1):
            series.frames.append(f)
            series.values.append(sorted(o.object_id for o in program.visible_at(f)))
        return series

    obj = program.get(object_id)
    frames = [f for f in obj.visible_frames() if first <= f <= last]
    series = PropertySeries(object_id, prop, frames)
    if prop == "color":
        color = tuple(float(c) for c in dominant_color(obj.canonical, cfg.color_clusters)[0])
        series.values = [color for _ in frames]
    elif prop == "position":
        series.values = [tuple(object_position(program, obj.keyframes[f].params).tolist())
                         for f in frames]
    elif prop == "size":
        series.values = [_size(program, obj, obj.keyframes[f].params) for f in frames]
    else:
        velocity = _velocities(program, obj)
        series.values = [tuple(velocity[f].tolist()) for f in frames]
    return series


def _held(obj: ProgramObject, frames: Sequence[int], tol: float) -> list[Event]:
    events = []
    run: list[int] = []
    for f in frames:
        if run and f == run[-1] + 1 and np.max(np.abs(
                obj.keyframes[f].params.as_vector()
                - obj.keyframes[run[-1]].params.as_vector())) <= tol:
            run.append(f)
            continue
        if len(run) >= 2:
            events.append(Event("held", tuple(run), run[0]))
        run = [f]
    if len(run) >= 2:
        events.append(Event("held", tuple(run), run[0]))
    return events


def _boundary(mask: BinaryMask) -> BinaryMask:
    return mask & ~ndimage.binary_erosion(mask)


def boundary_contact(mask: BinaryMask, other: BinaryMask
                     ) -> tuple[float, tuple[float, float], tuple[float, float]] | None:
    """Closest boundary-to-boundary distance between two masks.

    Returns:
        (distance, (x, y) on mask, (x, y) on other), or None if either is
        empty. Overlapping masks have distance 0.
    """
    if not np.any(mask) or not np.any(other):
        return None
    overlap = mask & other
    if np.any(overlap):
        ys, xs = np.nonzero(overlap)
        point = (float(xs[0]), float(ys[0]))
        return 0.0, point, point
    distance, (iy, ix) = ndimage.distance_transform_edt(~other, return_indices=True)
    edge = _boundary(mask)
    ys, xs = np.nonzero(edge)
    best = int(np.argmin(distance[ys, xs]))
    y, x = ys[best], xs[best]
    return (float(distance[y, x]), (float(x), float(y)),
            (float(ix[y, x]), float(iy[y, x])))


def _velocity_changes(program: MotionProgram, obj: ProgramObject, f: int,
                      cfg: EventConfig) -> bool:
    """Sign flip of a velocity component, or a large relative speed change, at f."""
    frames = obj.frames
    lo = max(frames[0], f - cfg.velocity_window)
    hi = min(frames[-1], f + cfg.velocity_window)
    if lo == f or hi == f or any(k not in obj.keyframes for k in (lo, hi)):
        return False
    here = object_position(program, obj.keyframes[f].params)
    v_in = (here - object_position(program, obj.keyframes[lo].params)) / (f - lo)
    v_out = (object_position(program, obj.keyframes[hi].params) - here) / (hi - f)
    if np.any((v_in * v_out < 0) & (np.abs(v_in) > _MIN_SPEED) & (np.abs(v_out) > _MIN_SPEED)):
        return True
    top = max(float(np.linalg.norm(v_in)), float(np.linalg.norm(v_out)))
    return top > _MIN_SPEED and float(np.linalg.norm(v_out - v_in)) > cfg.speed_change_ratio * top


def _collisions(program: MotionProgram, obj: ProgramObject, frames: Sequence[int],
                cfg: EventConfig) -> list[Event]:
    hits: dict[int, list[tuple[int, float, tuple, tuple]]] = {}
    for f in frames:
        mine = object_support(program, obj, f)
        for other in program.visible_at(f):
            if other.object_id == obj.object_id:
                continue
            contact = boundary_contact(mine, object_support(program, other, f))
            if contact is None or contact[0] >= cfg.contact_distance:
                continue
            if not (_velocity_changes(program, obj, f, cfg)
                    or _velocity_changes(program, other, f, cfg)):
                continue
            hits.setdefault(other.object_id, []).append((f, *contact))

    events = []
    for other_id, found in sorted(hits.items()):
        run: list[tuple[int, float, tuple, tuple]] = []
        for hit in found + [None]:
            if hit is not None and (not run or hit[0] == run[-1][0] + 1):
                run.append(hit)
                continue
            if run:
                best = min(run, key=lambda h: (h[1], h[0]))
                events.append(Event("collision", tuple(h[0] for h in run), best[0],
                                    others=(other_id,), contacts=(best[2], best[3])))
            run = [hit] if hit is not None else []
    return sorted(events, key=lambda e: (e.frame, e.others))


def _cycles(obj: ProgramObject, frames: Sequence[int], threshold: float) -> list[Event]:
    if len(frames) < 4:
        return []
    params = np.array([obj.keyframes[f].params.as_vector() for f in frames])
    spread = params.std(axis=0)
    moving = spread > 1e-9
    if not np.any(moving):
        return []
    series = (params[:, moving] - params[:, moving].mean(axis=0)) / spread[moving]
    n = len(frames)
    lags = np.arange(1, n // 2 + 1)
    energy = float(np.mean(series ** 2))
    acf = np.array([np.mean(series[:-lag] * series[lag:]) / energy for lag in lags])
    peaks, _ = find_peaks(acf, height=threshold)
    if len(peaks) == 0:
        return []
    period = int(lags[peaks[0]])
    return [Event("motionCycle", tuple(frames), frames[0], period=period)]


def event_query(program: MotionProgram, object_id: int,
                kind: Literal["held", "collision", "motionCycle"],
                frame_range: FrameRange | None = None,
                cfg: EventConfig | None = None) -> list[Event]:
    """Events of one object within a frame range.

    held: maximal runs of at least two consecutive frames with unchanged
    params. collision: frames where another object's boundary is closer
    than cfg.contact_distance and either participant's velocity flips sign
    or changes by more than cfg.speed_change_ratio of its speed; runs of
    such frames form one event at the closest contact. motionCycle: the
    first autocorrelation peak above cfg.cycle_threshold of the
    normalized parameter series, as a period.

    Raises:
        UnknownObjectError: If the object does not exist.
        RangeError: If the range is empty or outside the program.
        ValueError: If kind is unknown.
    """
    if kind not in EVENT_KINDS:
        raise ValueError(f"Unknown event kind '{kind}'; expected one of {EVENT_KINDS}")
    cfg = cfg or EventConfig()
    obj = program.get(object_id)
    first, last = resolve_range(program, frame_range)
    frames = [f for f in obj.visible_frames() if first <= f <= last]
    if kind == "held":
        events = _held(obj, frames, cfg.held_tol)
    elif kind == "collision":
        events = _collisions(program, obj, frames, cfg)
    else:
        events = _cycles(obj, frames, cfg.cycle_threshold)
    logger.debug("Object %d: %d %s events in %d..%d", object_id, len(events), kind,
                 first, last)
    return events
