"""Shared fixtures for CLI entry point tests."""
import json

import numpy as np
import pytest

from motionvec.diffcomp.affine import AffineParams
from motionvec.program.io import write_program
from motionvec.program.model import Keyframe, MotionProgram, ProgramObject
from motionvec.synth.script import SceneScript, save_script


def _solid(color, size=4):
    img = np.zeros((size, size, 4))
    img[..., :3] = color
    img[..., 3] = 1.0
    return img


@pytest.fixture
def program_path(tmp_path):
    """A two-object, four-frame program written to disk.

    Returns:
        Path to its SVG; the sidecar sits next to it.
    """
    red = ProgramObject(1, _solid((0.9, 0.1, 0.1)),
                        [Keyframe(t, AffineParams.translation(float(t), 0.0), 0)
                         for t in range(4)])
    blue = ProgramObject(2, _solid((0.1, 0.2, 0.9)),
                         [Keyframe(t, AffineParams.translation(-4.0, 0.0), 1) for t in range(2)])
    program = MotionProgram(width=16, height=12, num_frames=4, fps=8.0, objects=[red, blue])
    svg, _ = write_program(program, tmp_path / "program.svg")
    return svg


@pytest.fixture
def script_path(tmp_path):
    """A small scene script with one sliding square."""
    script = SceneScript(width=32, height=24, num_frames=4, sprites=[
        {"sprite_id": 1, "shape": "rect", "color": [0.9, 0.1, 0.1], "size": [8, 8],
         "track": {"x": {"kind": "linear", "start": 10.5, "velocity": 2},
                   "y": {"kind": "constant", "value": 11.5}}}])
    return save_script(script, tmp_path / "scene.json")


@pytest.fixture
def ops_path(tmp_path):
    """An ops file deleting object 2."""
    path = tmp_path / "ops.json"
    path.write_text(json.dumps({"ops": [{"select": {"ids": [2]},
                                         "apply": {"op": "delete_object"}}]}))
    return path
