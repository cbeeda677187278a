"""Built-in scene families used as acceptance suites."""
from collections.abc import Callable, Sequence
from typing import Any, Final

import numpy as np

from .script import SceneScript

__all__ = ["ball2_like", "easy_suite", "occlusion_suite", "PROFILES"]

_WIDTH: Final[int] = 320
_HEIGHT: Final[int] = 240

_PALETTE: Final[np.ndarray] = np.array([
    [0.85, 0.15, 0.15], [0.15, 0.6, 0.2], [0.15, 0.25, 0.85],
    [0.8, 0.6, 0.1], [0.6, 0.2, 0.7], [0.1, 0.6, 0.65]])


def _color(rng: np.random.Generator) -> list[float]:
    """A saturated color far from the white background."""
    base = _PALETTE[rng.integers(0, len(_PALETTE))]
    return [round(float(c), 3) for c in np.clip(base + rng.uniform(-0.05, 0.05, 3), 0, 1)]


def _sprite(sprite_id: int, shape: str, color: list[float], size: float | Sequence[float],
            track: dict[str, Any], **extra: Any) -> dict[str, Any]:
    size = [size, size] if np.isscalar(size) else list(size)
    return {"sprite_id": sprite_id, "shape": shape, "color": color, "size": size,
            "track": track, **extra}


def _const(value: float) -> dict[str, Any]:
    return {"kind": "constant", "value": round(float(value), 3)}


def _line(start: float, *, end: float | None = None,
          velocity: float | None = None) -> dict[str, Any]:
    if end is not None:
        return {"kind": "linear", "start": round(float(start), 3), "end": round(float(end), 3)}
    return {"kind": "linear", "start": round(float(start), 3), "velocity": velocity}


def ball2_like(seed: int = 0, num_frames: int = 500, width: int = _WIDTH,
               height: int = _HEIGHT) -> SceneScript:
    """Four balls bouncing in separate lanes: simple motion, no occlusion."""
    rng = np.random.default_rng(seed)
    lane = height / 4.0
    sprites = []
    for i in range(4):
        size = float(rng.integers(14, 22))
        speed = float(rng.uniform(1.0, 3.0)) * float(rng.choice([-1.0, 1.0]))
        sprites.append(_sprite(i + 1, "disc", _color(rng), size, {
            "x": {"kind": "bounce", "start": round(float(rng.uniform(size, width - size)), 2),
                  "velocity": round(speed, 2), "low": size, "high": width - 1 - size},
            "y": _const(lane * (i + 0.5)),
        }))
    return SceneScript(width=width, height=height, num_frames=num_frames, seed=seed,
                       sprites=sprites)


def easy_suite(seed: int = 0, num_frames: int = 120, width: int = _WIDTH,
               height: int = _HEIGHT) -> list[SceneScript]:
    """Six clips with no occlusion and no fast motion."""
    rng = np.random.default_rng(seed)
    cx, cy = width / 2.0, height / 2.0
    scenes = [
        [_sprite(1, "rect", _color(rng), 24, {
            "x": _line(40, end=width - 40), "y": _const(cy)})],
        [_sprite(1, "disc", _color(rng), 20, {
            "x": _const(cx),
            "y": {"kind": "bounce", "start": cy, "velocity": 2.5, "low": 30,
                  "high": height - 30}})],
        [_sprite(1, "polygon", _color(rng), 36, {
            "x": _const(cx), "y": _const(cy), "theta": _line(0, velocity=3)},
            sides=5, jitter=0.2)],
        [_sprite(1, "glyph", _color(rng), 30, {
            "x": {"kind": "sine", "center": cx, "amplitude": width / 4, "period": 60},
            "y": _const(cy),
            "sx": {"kind": "sine", "center": 1.0, "amplitude": 0.2, "period": 40},
            "sy": {"kind": "sine", "center": 1.0, "amplitude": 0.2, "period": 40}})],
        [_sprite(1, "rect", _color(rng), 20, {
            "x": _line(30, end=width - 30), "y": _const(height / 4)}),
         _sprite(2, "disc", _color(rng), 20, {
             "x": _line(width - 30, end=30), "y": _const(3 * height / 4)})],
        ball2_like(seed, num_frames, width, height).sprites,
    ]
    return [SceneScript(width=width, height=height, num_frames=num_frames, seed=seed,
                        sprites=sprites) for sprites in scenes]


def occlusion_suite(seed: int = 0, num_frames: int = 120, width: int = _WIDTH,
                    height: int = _HEIGHT) -> list[SceneScript]:
    """Six clips with occlusion passes, one merge and one split."""
    rng = np.random.default_rng(seed)
    cx, cy = width / 2.0, height / 2.0
    t = num_frames // 2
    scripts = []

    def clip(*sprites: dict[str, Any], events: Sequence[dict[str, Any]] = ()) -> None:
        scripts.append(SceneScript(width=width, height=height, num_frames=num_frames,
                                   seed=seed, sprites=sprites, events=events))

    # two discs pass each other, the second in front
    clip(_sprite(1, "disc", _color(rng), 30, {"x": _line(40, end=width - 40), "y": _const(cy)}),
         _sprite(2, "disc", _color(rng), 30, {"x": _line(width - 40, end=40),
                                              "y": _const(cy + 10)}, z=1))

    # a tall bar sweeps across a resting square
    clip(_sprite(1, "rect", _color(rng), 40, {"x": _const(cx), "y": _const(cy)}),
         _sprite(2, "rect", _color(rng), (12, 100), {"x": _line(20, end=width - 20),
                                                     "y": _const(cy)}, z=1))

    # a polygon crosses behind a disc
    clip(_sprite(1, "polygon", _color(rng), 34, {"x": _line(40, end=width - 40),
                                                 "y": _const(cy),
                                                 "theta": _line(0, velocity=2)}, sides=6),
         _sprite(2, "disc", _color(rng), 44, {"x": _const(cx), "y": _const(cy)}, z=1))

    # three sprites cross the middle at different depths
    clip(_sprite(1, "rect", _color(rng), 26, {"x": _line(30, end=width - 30), "y": _const(cy)}),
         _sprite(2, "disc", _color(rng), 26, {"x": _const(cx),
                                              "y": _line(30, end=height - 30)}, z=1),
         _sprite(3, "glyph", _color(rng), 26, {"x": _line(width - 30, end=30),
                                               "y": _line(height - 30, end=30)}, z=2))

    # two halves slide together at frame t and continue as one block
    color = _color(rng)
    clip(_sprite(1, "rect", color, 20, {"x": _line(cx - 10 - (t - 1), velocity=1),
                                        "y": _const(cy)}, end=t - 1),
         _sprite(2, "rect", color, 20, {"x": _line(cx + 10 + (t - 1), velocity=-1),
                                        "y": _const(cy)}, end=t - 1),
         _sprite(3, "rect", color, (40, 20), {"x": _const(cx), "y": _line(cy, velocity=1)},
                 start=t),
         events=[{"kind": "merge", "frame": t, "sprites": [1, 2], "into": 3}])

    # one block breaks in two halves at frame t that drift apart
    color = _color(rng)
    clip(_sprite(1, "rect", color, (40, 20), {"x": _const(cx), "y": _line(cy - t, velocity=1)},
                 end=t - 1),
         _sprite(2, "rect", color, 20, {"x": _line(cx - 11, velocity=-1), "y": _const(cy - 1)},
                 start=t),
         _sprite(3, "rect", color, 20, {"x": _line(cx + 11, velocity=1), "y": _const(cy - 1)},
                 start=t),
         events=[{"kind": "split", "frame": t, "sprite": 1, "into": [2, 3]}])
    return scripts


PROFILES: Final[dict[str, Callable[[int], list[SceneScript]]]] = {
    "ball2_like": lambda seed: [ball2_like(seed)],
    "easy_suite": easy_suite,
    "occlusion_suite": occlusion_suite,
}
