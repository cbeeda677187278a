import math

import numpy as np
import pytest

from motionvec.diffcomp.affine import AffineParams
from motionvec.program.model import Keyframe, MotionProgram, ProgramObject

RED = (0.9, 0.1, 0.1)
BLUE = (0.1, 0.2, 0.9)


def solid(color, size=4):
    img = np.zeros((size, size, 4))
    img[..., :3] = color
    img[..., 3] = 1.0
    return img


def make_program(tracks, width=40, height=30, num_frames=None):
    """Program from {id: (color, [tx...] or [(tx, ty)...])}, each starting at frame 0."""
    num_frames = num_frames or max(len(xs) for _, xs in tracks.values())
    objects = []
    for z, (object_id, (color, xs)) in enumerate(sorted(tracks.items())):
        keyframes = []
        for f, x in enumerate(xs):
            tx, ty = x if isinstance(x, tuple) else (x, 0.0)
            keyframes.append(Keyframe(f, AffineParams.translation(tx, ty), z))
        objects.append(ProgramObject(object_id, solid(color), keyframes))
    return MotionProgram(width=width, height=height, num_frames=num_frames, objects=objects)


@pytest.fixture
def walker():
    """Red object 1 walks one pixel per frame over 10 frames; blue object 2 waits at the left."""
    return make_program({1: (RED, [float(t) for t in range(10)]),
                         2: (BLUE, [-12.0] * 10)})


@pytest.fixture
def bounce():
    """Red object 1 touches blue object 2 at frame 4 and turns back."""
    return make_program({1: (RED, [-12.0, -10.0, -8.0, -6.0, -4.0, -6.0, -8.0, -10.0, -12.0]),
                         2: (BLUE, [0.0] * 9)})


@pytest.fixture
def swinging():
    """Object 1 swings sinusoidally with a 24-frame period over 96 frames."""
    return make_program({1: (RED, [5.0 * math.sin(2 * math.pi * t / 24) for t in range(96)])},
                        num_frames=96)
