import numpy as np
import pytest

from motionvec.configuration.module_configs import RefineConfig
from motionvec.configuration.pipeline_config import PipelineConfig
from motionvec.diffcomp.affine import AffineParams
from motionvec.imaging.raster import read_label_png
from motionvec.program.refactor import build_program
from motionvec.segmentation.background import BackgroundModel
from motionvec.segmentation.regions import Region
from motionvec.tracking.mapping import CandidateMapping, Direction, MappingGraph, MappingType
from motionvec.tracking.objects import TrackedObject
from motionvec.tracking.propagation import TrackingState, propagate_ids
from motionvec.tracking.tracker import (TrackingResult, label_image_at, track_video,
                                        write_label_pngs)

RED = (0.9, 0.1, 0.1)


def _block(y0, x0, h, w, shape=(8, 8)):
    m = np.zeros(shape, dtype=bool)
    m[y0:y0 + h, x0:x0 + w] = True
    return m


def _result():
    frame = np.ones((8, 8, 3))
    low = TrackedObject.from_pixels(1, frame, _block(1, 1, 4, 4), t=0, z=0)
    high = TrackedObject.from_pixels(2, frame, _block(3, 3, 4, 4), t=0, z=1)
    labels = [{1: low.timeline[0].mask, 2: high.timeline[0].mask}]
    return TrackingResult(objects={1: low, 2: high}, labels=labels, records=[],
                          canvas=(8, 8))


def test_label_image_prefers_top_object():
    """Overlapping labels resolve to the higher depth."""
    result = _result()
    labels = label_image_at(result, 0)
    assert result.num_frames == 1
    assert labels[1, 1] == 1
    assert labels[3, 3] == 2
    assert labels[0, 0] == 0


def test_write_label_pngs(tmp_path):
    """One 16-bit label image per frame."""
    paths = write_label_pngs(_result(), tmp_path / "labels")
    assert [p.name for p in paths] == ["frame_00000.png"]
    assert np.array_equal(read_label_png(paths[0]), label_image_at(_result(), 0))


def test_track_video_needs_frames():
    """An empty clip is an error."""
    with pytest.raises(ValueError):
        track_video([])


def _moving_square(num_frames=3, step=2):
    frames = []
    for t in range(num_frames):
        frame = np.ones((32, 32, 3))
        frame[10:18, 6 + step * t:14 + step * t] = RED
        frames.append(frame)
    return frames


@pytest.mark.slow
def test_track_moving_square():
    """A translating square keeps its id and its per-frame step."""
    result = track_video(_moving_square())
    assert result.num_frames == 3
    assert list(result.objects) == [1]
    obj = result.objects[1]
    assert obj.frames == [0, 1, 2]
    assert {r.mtype for r in result.records} == {MappingType.ONE_TO_ONE}
    for t in (1, 2):
        params = obj.timeline[t].params
        assert params.tx == pytest.approx(2.0, abs=0.5)
        assert params.ty == pytest.approx(0.0, abs=0.5)
    assert obj.timeline[0].params == AffineParams()


def _two_bars_frame(t):
    frame = np.ones((12, 16, 3))
    if t < 2:
        frame[2:5, 2:5] = RED
        frame[2:5, 6:9] = RED
    elif t == 2:
        frame[2:5, 2:9] = RED
    else:
        frame[2:5, 2:5] = RED
        frame[2:5, 10:13] = RED
    return frame


def _merge_then_split():
    """Two squares merge into one bar at frame 2, which splits again at frame 3."""
    shape = (12, 16)
    left, right, bar, far_right = (_block(2, 2, 3, 3, shape), _block(2, 6, 3, 3, shape),
                                   _block(2, 2, 3, 7, shape), _block(2, 10, 3, 3, shape))
    frames = [_two_bars_frame(t) for t in range(4)]
    state = TrackingState()
    state.labels.append({})
    for z, mask in enumerate((left, right)):
        object_id = state.fresh_id()
        state.objects[object_id] = TrackedObject.from_pixels(object_id, frames[0], mask, 0, z)
        state.labels[0][object_id] = mask

    def accepted(direction, objects, regions):
        c = CandidateMapping.of(direction, objects, regions)
        c.score = 0.0
        return c

    forward = MappingGraph(Direction.FORWARD, motions={1: np.eye(3), 2: np.eye(3)},
                           depths={1: 0.0, 2: 1.0})
    propagate_ids(state, [accepted(Direction.FORWARD, [1], [1]),
                          accepted(Direction.FORWARD, [2], [2])],
                  [Region.from_mask(1, 1, left), Region.from_mask(1, 2, right)],
                  1, frames[1], forward=forward)
    backward = MappingGraph(Direction.BACKWARD, motions={1: np.eye(3)})
    propagate_ids(state, [accepted(Direction.BACKWARD, [1, 2], [1])],
                  [Region.from_mask(2, 1, bar)], 2, frames[2], backward=backward)
    propagate_ids(state, [accepted(Direction.BACKWARD, [3], [1, 2])],
                  [Region.from_mask(3, 1, left), Region.from_mask(3, 2, far_right)],
                  3, frames[3])
    result = TrackingResult(objects=state.objects, labels=state.labels,
                            records=state.records,
                            background=BackgroundModel.solid_rgb((1.0, 1.0, 1.0)),
                            canvas=(16, 12))
    return result, frames


def test_merge_then_split_id_table():
    """Merged ids replace their constituents everywhere; a split starts fresh ids."""
    result, _ = _merge_then_split()
    assert [(r.t, r.mtype, r.objects, r.results) for r in result.records] == [
        (1, MappingType.ONE_TO_ONE, (1,), (1,)),
        (1, MappingType.ONE_TO_ONE, (2,), (2,)),
        (2, MappingType.MANY_TO_ONE_MERGE, (1, 2), (3,)),
        (3, MappingType.ONE_TO_MANY_SPLIT, (3,), (4, 5)),
    ]
    assert [sorted(labels) for labels in result.labels] == [[3], [3], [3], [4, 5]]
    assert sorted(result.objects) == [3, 4, 5]
    assert result.objects[3].frames == [0, 1, 2]
    assert not result.objects[3].alive
    assert [result.objects[i].frames for i in (4, 5)] == [[3], [3]]
    assert label_image_at(result, 0)[3, 7] == 3


def test_merged_history_reaches_the_program():
    """The built program carries one track for the merged object, not its parts."""
    result, frames = _merge_then_split()
    config = PipelineConfig(refine=RefineConfig(enabled=False))
    program = build_program(result, frames, config=config)
    assert program.object_ids() == [3, 4, 5]
    assert program.get(3).frames == [0, 1, 2]
    assert [o.object_id for o in program.visible_at(0)] == [3]
