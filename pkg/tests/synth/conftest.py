import pytest

from motionvec.synth.script import SceneScript

RED = [0.9, 0.1, 0.1]
BLUE = [0.1, 0.2, 0.9]


def rect(sprite_id, color, x, y, size=8, **extra):
    """A rect sprite; x and y are numbers (constant) or track dicts."""
    track = {name: value if isinstance(value, dict) else {"kind": "constant", "value": value}
             for name, value in (("x", x), ("y", y))}
    return {"sprite_id": sprite_id, "shape": "rect", "color": color, "size": [size, size],
            "track": track, **extra}


@pytest.fixture
def sliding_script():
    """One red square sliding right two pixels per frame."""
    return SceneScript(width=40, height=30, num_frames=5, sprites=[
        rect(1, RED, {"kind": "linear", "start": 10, "velocity": 2}, 15)])


@pytest.fixture
def merge_script():
    """Two squares that end at frame 2 and become one bar at frame 3."""
    return SceneScript(width=40, height=30, num_frames=6, sprites=[
        rect(1, RED, 8, 15, end=2),
        rect(2, RED, 30, 15, end=2),
        {"sprite_id": 3, "shape": "rect", "color": RED, "size": [16, 8], "start": 3,
         "track": {"x": {"kind": "constant", "value": 19.5},
                   "y": {"kind": "constant", "value": 15}}},
    ], events=[{"kind": "merge", "frame": 3, "sprites": [1, 2], "into": 3}])
