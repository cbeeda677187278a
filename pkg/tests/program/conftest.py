import numpy as np
import pytest

from motionvec.diffcomp.affine import AffineParams
from motionvec.program.model import Keyframe, MotionProgram, ProgramObject

RED = (0.9, 0.1, 0.1)
BLUE = (0.1, 0.1, 0.9)


def solid(color, size=4):
    img = np.ones((size, size, 4))
    img[..., :3] = color
    return img


@pytest.fixture
def program():
    """A 16x12, 4-frame program.

    Object 1 is a red square moving one pixel right per frame. Object 2 is
    a blue square, in front, present in frames 0 and 1 only.
    """
    red = ProgramObject(1, solid(RED), [Keyframe(t, AffineParams.translation(t, 0.0), 0)
                                        for t in range(4)])
    blue = ProgramObject(2, solid(BLUE), [Keyframe(t, AffineParams.translation(-4.0, 0.0), 1)
                                          for t in range(2)])
    return MotionProgram(width=16, height=12, num_frames=4, fps=8.0, objects=[red, blue])
