"""Scene scripts: declarative descriptions of synthetic motion-graphics clips.

A script is JSON::

    {"width": 96, "height": 64, "num_frames": 24, "fps": 24,
     "background": [1, 1, 1], "seed": 0,
     "sprites": [{"sprite_id": 1, "shape": "disc", "color": [0.9, 0.1, 0.1],
                  "size": [12, 12], "z": 0,
                  "track": {"x": {"kind": "linear", "start": 20, "end": 70},
                            "y": {"kind": "constant", "value": 30}}}],
     "events": [{"kind": "merge", "frame": 10, "sprites": [1, 2], "into": 3}]}

Sprite tracks are per-parameter curves over the sprite's lifetime: ``x`` and
``y`` place its center in frame pixels, ``theta`` is in degrees, and ``sx``,
``sy``, ``kx`` are scale and shear. Omitted parameters stay at the canvas
center, zero rotation and unit scale.
"""
import json
import math
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any, Final

from ..configuration.parameterizable_mixin import ParameterizableMixin
from ..exceptions import FrameIOError, ScriptError

__all__ = [
    "SHAPES",
    "TRACK_KINDS",
    "TRACK_PARAMS",
    "SpriteSpec",
    "SceneScript",
    "evaluate_track",
    "load_script",
    "save_script",
]

SHAPES: Final[tuple[str, ...]] = ("rect", "disc", "polygon", "glyph")
TRACK_KINDS: Final[tuple[str, ...]] = ("constant", "linear", "sine", "bounce")
TRACK_PARAMS: Final[tuple[str, ...]] = ("x", "y", "theta", "sx", "sy", "kx")
_SCRIPT_EVENTS: Final[tuple[str, ...]] = ("merge", "split")

_TRACK_FIELDS: Final[dict[str, set[str]]] = {
    "constant": {"value"},
    "linear": {"start", "end", "velocity"},
    "sine": {"center", "amplitude", "period", "phase"},
    "bounce": {"start", "velocity", "low", "high"},
}


def _check(condition: bool, where: str, message: str) -> None:
    if not condition:
        raise ScriptError(f"{where}: {message}")


def _check_track(where: str, track: Any) -> None:
    _check(isinstance(track, Mapping), where, "a track must be an object")
    kind = track.get("kind")
    _check(kind in TRACK_KINDS, where, f"kind must be one of {TRACK_KINDS}, got {kind!r}")
    unknown = set(track) - {"kind"} - _TRACK_FIELDS[kind]
    _check(not unknown, where, f"unknown fields {sorted(unknown)} for a {kind} track")
    if kind == "constant":
        _check("value" in track, where, "a constant track needs 'value'")
    elif kind == "linear":
        _check("start" in track and ("end" in track) != ("velocity" in track), where,
               "a linear track needs 'start' and exactly one of 'end' or 'velocity'")
    elif kind == "sine":
        _check(float(track.get("period", 0)) > 0, where, "a sine track needs period > 0")
    else:
        _check(all(k in track for k in ("start", "velocity", "low", "high")), where,
               "a bounce track needs start, velocity, low and high")
        _check(float(track["low"]) < float(track["high"]), where, "bounce needs low < high")


def evaluate_track(track: Mapping[str, Any], frame: int, start: int, end: int) -> float:
    """Value of a track at a frame of a lifetime start..end."""
    kind = track["kind"]
    n = frame - start
    if kind == "constant":
        return float(track["value"])
    if kind == "linear":
        if "velocity" in track:
            return float(track["start"]) + float(track["velocity"]) * n
        u = 0.0 if end == start else n / (end - start)
        return float(track["start"]) + (float(track["end"]) - float(track["start"])) * u
    if kind == "sine":
        phase = 2.0 * math.pi * n / float(track["period"]) + float(track.get("phase", 0.0))
        amplitude = float(track.get("amplitude", 0.0))
        return float(track.get("center", 0.0)) + amplitude * math.sin(phase)
    low, high = float(track["low"]), float(track["high"])
    span = high - low
    folded = (float(track["start"]) + float(track["velocity"]) * n - low) % (2.0 * span)
    return low + (folded if folded <= span else 2.0 * span - folded)


class SpriteSpec(ParameterizableMixin):
    """One sprite of a scene.

    Args:
        sprite_id: Positive id, also the ground-truth object id.
        shape: "rect", "disc", "polygon" or "glyph" (an L of two bars).
        color: RGB in [0, 1].
        size: (width, height) of the shape in pixels.
        sides: Polygon corner count.
        jitter: Relative random perturbation of polygon corner radii.
        start: First frame the sprite exists.
        end: Last frame it exists; None means the end of the scene.
        z: Depth; higher is in front, ties go to the larger id.
        track: Parameter name -> track.

    Raises:
        ScriptError: On an invalid field.
    """

    def __init__(self, sprite_id: int = 1, shape: str = "rect",
                 color: Sequence[float] = (0.0, 0.0, 0.0), size: Sequence[float] = (8, 8),
                 sides: int = 5, jitter: float = 0.0, start: int = 0, end: int | None = None,
                 z: int = 0, track: Mapping[str, Mapping[str, Any]] | None = None):
        where = f"sprite {sprite_id}"
        _check(int(sprite_id) >= 1, where, "sprite_id must be >= 1")
        _check(shape in SHAPES, where, f"shape must be one of {SHAPES}, got {shape!r}")
        _check(len(color) == 3 and all(0.0 <= float(c) <= 1.0 for c in color), where,
               "color must be three values in [0, 1]")
        _check(len(size) == 2 and all(float(s) >= 1.0 for s in size), where,
               "size must be two values >= 1")
        _check(int(sides) >= 3, where, "a polygon needs sides >= 3")
        _check(0.0 <= float(jitter) < 1.0, where, "jitter must lie in [0, 1)")
        _check(int(start) >= 0, where, "start must be >= 0")
        _check(end is None or int(end) >= int(start), where, "end must be >= start")
        track = dict(track or {})
        for name, curve in track.items():
            _check(name in TRACK_PARAMS, where, f"unknown track parameter {name!r}")
            _check_track(f"{where} track {name}", curve)
        self.sprite_id = int(sprite_id)
        self.shape = shape
        self.color = tuple(float(c) for c in color)
        self.size = tuple(float(s) for s in size)
        self.sides = int(sides)
        self.jitter = float(jitter)
        self.start = int(start)
        self.end = None if end is None else int(end)
        self.z = int(z)
        self.track = {name: dict(curve) for name, curve in sorted(track.items())}

    def get_params(self) -> dict[str, Any]:
        return {"sprite_id": self.sprite_id, "shape": self.shape, "color": list(self.color),
                "size": list(self.size), "sides": self.sides, "jitter": self.jitter,
                "start": self.start, "end": self.end, "z": self.z, "track": self.track}


class SceneScript(ParameterizableMixin):
    """A whole synthetic scene.

    Args:
        width, height: Canvas size.
        num_frames: Clip length.
        fps: Playback rate.
        background: Background RGB.
        seed: Seed for every random choice (polygon jitter).
        sprites: Sprites or their plain dicts.
        events: Merge and split annotations. A merge
            ``{"kind": "merge", "frame": t, "sprites": [a, b], "into": c}``
            ends a and b at t - 1 and starts c at t; a split
            ``{"kind": "split", "frame": t, "sprite": a, "into": [c, d]}``
            ends a and starts c and d.

    Raises:
        ScriptError: On an invalid field or an inconsistent event.
    """

    def __init__(self, width: int = 64, height: int = 64, num_frames: int = 8,
                 fps: float = 24.0, background: Sequence[float] = (1.0, 1.0, 1.0),
                 seed: int = 0, sprites: Sequence[SpriteSpec | Mapping[str, Any]] = (),
                 events: Sequence[Mapping[str, Any]] = ()):
        _check(int(width) >= 1 and int(height) >= 1, "scene", "canvas must be positive")
        _check(int(num_frames) >= 1, "scene", "num_frames must be >= 1")
        _check(float(fps) > 0, "scene", "fps must be > 0")
        _check(len(background) == 3, "scene", "background must be RGB")
        built = []
        for i, s in enumerate(sprites):
            if isinstance(s, Mapping):
                try:
                    s = SpriteSpec(**s)
                except TypeError as e:
                    raise ScriptError(f"sprites[{i}]: {e}") from e
            built.append(s)
        ids = [s.sprite_id for s in built]
        _check(len(set(ids)) == len(ids), "scene", f"sprite ids repeat: {ids}")
        for s in built:
            _check(s.start < int(num_frames), f"sprite {s.sprite_id}",
                   "starts after the last frame")
        self.width = int(width)
        self.height = int(height)
        self.num_frames = int(num_frames)
        self.fps = float(fps)
        self.background = tuple(float(c) for c in background)
        self.seed = int(seed)
        self.sprites = built
        self.events = [dict(e) for e in events]
        for i, event in enumerate(self.events):
            self._check_event(i, event)

    def get_params(self) -> dict[str, Any]:
        return {"width": self.width, "height": self.height, "num_frames": self.num_frames,
                "fps": self.fps, "background": list(self.background), "seed": self.seed,
                "sprites": [s.get_params() for s in self.sprites], "events": self.events}

    def sprite(self, sprite_id: int) -> SpriteSpec:
        for s in self.sprites:
            if s.sprite_id == sprite_id:
                return s
        raise ScriptError(f"scene: no sprite {sprite_id}")

    def lifetime(self, sprite_id: int) -> tuple[int, int]:
        s = self.sprite(sprite_id)
        last = self.num_frames - 1
        return s.start, last if s.end is None else min(s.end, last)

    def _check_event(self, index: int, event: Mapping[str, Any]) -> None:
        where = f"events[{index}]"
        kind = event.get("kind")
        _check(kind in _SCRIPT_EVENTS, where, f"kind must be one of {_SCRIPT_EVENTS}")
        _check("frame" in event and 1 <= int(event["frame"]) < self.num_frames, where,
               "frame must lie in [1, num_frames)")
        t = int(event["frame"])
        if kind == "merge":
            sources, targets = list(event.get("sprites", [])), [event.get("into")]
            _check(len(sources) >= 2, where, "a merge needs at least two sprites")
        else:
            sources, targets = [event.get("sprite")], list(event.get("into", []))
            _check(len(targets) >= 2, where, "a split needs at least two results")
        for s in sources:
            _check(self.lifetime(int(s))[1] == t - 1, where, f"sprite {s} must end at {t - 1}")
        for s in targets:
            _check(self.lifetime(int(s))[0] == t, where, f"sprite {s} must start at {t}")


def load_script(path: str | Path) -> SceneScript:
    """Read a scene script.

    Raises:
        FrameIOError: If the file cannot be read.
        ScriptError: If it is not valid JSON or not a valid script.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FrameIOError(f"Cannot read scene script {path}: {e}") from e
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScriptError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: "
                          f"{e.msg}") from e
    if not isinstance(tree, Mapping):
        raise ScriptError(f"{path}: a scene script must be a JSON object")
    try:
        return SceneScript(**tree)
    except TypeError as e:
        raise ScriptError(f"{path}: {e}") from e


def save_script(script: SceneScript, path: str | Path) -> Path:
    """Write a script as sorted, indented JSON."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(script.get_params(), sort_keys=True, indent=1) + "\n",
                        encoding="utf-8")
    except OSError as e:
        raise FrameIOError(f"Cannot write scene script {path}: {e}") from e
    return path
