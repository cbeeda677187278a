"""Whole-pipeline runs on small synthetic clips."""
import pytest

from motionvec.configuration.module_configs import RefineConfig
from motionvec.configuration.pipeline_config import PipelineConfig
from motionvec.diffcomp.affine import AffineParams
from motionvec.program.io import parse_program, write_program
from motionvec.program.refactor import build_program
from motionvec.program.render import reconstruction_error
from motionvec.synth.compare import compare_result, match_object
from motionvec.synth.profiles import easy_suite, occlusion_suite
from motionvec.synth.scene import generate_scene
from motionvec.synth.script import SceneScript
from motionvec.tracking.tracker import track_video
from motionvec.xform.operators import adj_global_motion

SUITE_SIZE = {"num_frames": 16, "width": 160, "height": 120}


def _two_lanes(num_frames=6):
    return SceneScript(width=48, height=32, num_frames=num_frames, sprites=[
        {"sprite_id": 1, "shape": "rect", "color": [0.85, 0.15, 0.15], "size": [8, 8],
         "track": {"x": {"kind": "linear", "start": 8.5, "velocity": 2},
                   "y": {"kind": "constant", "value": 8.5}}},
        {"sprite_id": 2, "shape": "disc", "color": [0.15, 0.25, 0.85], "size": [10, 10],
         "track": {"x": {"kind": "linear", "start": 38.5, "velocity": -2},
                   "y": {"kind": "constant", "value": 22.5}}},
    ])


def _front_disc_scene():
    """A small disc slides behind a larger, lower-id disc drawn in front."""
    return SceneScript(width=64, height=40, num_frames=8, sprites=[
        {"sprite_id": 1, "shape": "disc", "color": [0.85, 0.15, 0.15], "size": [16, 16],
         "z": 1, "track": {"x": {"kind": "constant", "value": 32},
                           "y": {"kind": "constant", "value": 20}}},
        {"sprite_id": 2, "shape": "disc", "color": [0.15, 0.25, 0.85], "size": [14, 14],
         "z": 0, "track": {"x": {"kind": "linear", "start": 12, "velocity": 2},
                           "y": {"kind": "constant", "value": 20}}},
    ])


@pytest.mark.slow
def test_vectorize_two_lanes(tmp_path):
    """Two sprites in separate lanes are tracked without errors and reconstructed."""
    scene = generate_scene(_two_lanes())
    config = PipelineConfig()
    result = track_video(scene.frames, config)
    assert len(result.objects) == 2
    assert compare_result(result, scene).total == 0

    program = build_program(result, scene.frames, config=config)
    _, mean = reconstruction_error(program, scene.frames)
    assert mean <= 0.01

    svg, _ = write_program(program, tmp_path / "lanes.svg")
    reread = parse_program(svg)
    assert reread.object_ids() == program.object_ids()
    assert reconstruction_error(reread, scene.frames)[1] == pytest.approx(mean)


@pytest.mark.slow
@pytest.mark.parametrize("index", range(6))
def test_easy_suite_clip(index):
    """Clips without occlusion track with no errors and reconstruct closely."""
    scene = generate_scene(easy_suite(**SUITE_SIZE)[index])
    config = PipelineConfig()
    result = track_video(scene.frames, config)
    assert compare_result(result, scene).total == 0
    program = build_program(result, scene.frames, config=config)
    assert reconstruction_error(program, scene.frames)[1] <= 0.01


@pytest.mark.slow
@pytest.mark.parametrize("index", range(6))
def test_occlusion_suite_clip(index):
    """Occlusion passes, the merge and the split reproduce every scripted decision."""
    scene = generate_scene(occlusion_suite(**SUITE_SIZE)[index])
    result = track_video(scene.frames, PipelineConfig(refine=RefineConfig(enabled=False)))
    errors = compare_result(result, scene)
    assert errors.total == 0, errors.as_dict()


@pytest.mark.slow
def test_depth_against_id_order_is_recovered():
    """The lower-id sprite drawn in front stays in front in the program."""
    scene = generate_scene(_front_disc_scene())
    config = PipelineConfig(refine=RefineConfig(enabled=False))
    result = track_video(scene.frames, config)
    assert compare_result(result, scene).total == 0
    program = build_program(result, scene.frames, config=config)
    for t in (5, 6, 7):
        truth_to_predicted = {match_object(mask, scene.labels[t]): object_id
                              for object_id, mask in result.labels[t].items()}
        front, back = truth_to_predicted[1], truth_to_predicted[2]
        assert program.get(front).keyframes[t].z > program.get(back).keyframes[t].z
        assert scene.program.get(1).keyframes[t].z > scene.program.get(2).keyframes[t].z


@pytest.mark.slow
def test_edit_after_vectorizing():
    """A vectorized program can be moved as a whole and still renders."""
    scene = generate_scene(_two_lanes(num_frames=4))
    config = PipelineConfig(refine=RefineConfig(enabled=False))
    program = build_program(track_video(scene.frames, config), scene.frames, config=config)
    for object_id in program.object_ids():
        adj_global_motion(program, object_id, AffineParams.translation(0.0, 1.0))
    program.validate()
    assert reconstruction_error(program, scene.frames)[1] > 0.0
