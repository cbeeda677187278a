import math

import numpy as np
import pytest

from motionvec.exceptions import RangeError
from motionvec.xform.effects import (anticipation_follow_through, motion_texture, recolor,
                                     retime_to_beats, slow_in_out, speed_minima, stretch_time)

from .conftest import BLUE, RED, make_program


@pytest.fixture
def pausing():
    """Object 1 slows down around frame 3."""
    return make_program({1: (RED, [0.0, 3.0, 6.0, 7.0, 8.0, 11.0, 14.0])})


def _tx(program, object_id=1):
    obj = program.get(object_id)
    return [obj.keyframes[f].params.tx for f in obj.frames]


def test_stretch_time(walker):
    """Doubling the duration doubles the span."""
    stretch_time(walker, 1, 2.0)
    assert walker.get(1).frames == list(range(19))
    assert _tx(walker)[-1] == 9.0
    with pytest.raises(ValueError, match="> 0"):
        stretch_time(walker, 1, 0.0)


def test_stretch_time_faster(walker):
    """Halving the duration keeps the endpoints."""
    stretch_time(walker, 1, 0.5)
    assert walker.get(1).frames == [0, 1, 2, 3, 4]
    assert _tx(walker) == pytest.approx([0.0, 2.25, 4.5, 6.75, 9.0])


def test_slow_in_out(walker):
    """Easing keeps length and endpoints and slows the start."""
    slow_in_out(walker, 1, (0, 8))
    tx = _tx(walker)
    assert len(tx) == 10
    assert tx[0] == 0.0 and tx[8] == pytest.approx(8.0) and tx[9] == 9.0
    assert tx[4] == pytest.approx(4.0)
    assert tx[1] == pytest.approx(0.0625)


def test_speed_minima(pausing, walker):
    """The slow frame is a speed minimum; steady motion has none."""
    assert speed_minima(pausing, 1) == [3]
    assert speed_minima(walker, 1) == []


def test_retime_to_beats(pausing):
    """The speed minimum lands on the beat and the rest follows."""
    retime_to_beats(pausing, 1, [5])
    obj = pausing.get(1)
    assert obj.keyframes[5].params.tx == pytest.approx(7.0)
    assert obj.frames[-1] == 8
    assert obj.keyframes[8].params.tx == 14.0
    with pytest.raises(RangeError):
        retime_to_beats(make_program({1: (RED, [0.0, 3.0, 6.0, 7.0, 8.0, 11.0, 14.0])}),
                        1, [0])


def test_anticipation_follow_through(walker):
    """The object pulls back a quarter in and overshoots three quarters in."""
    anticipation_follow_through(walker, 1, (0, 8), amplitude=5.0)
    tx = _tx(walker)
    assert tx[2] == pytest.approx(2.0 - 5.0)
    assert tx[6] == pytest.approx(6.0 + 5.0)
    assert tx[0] == pytest.approx(0.0) and tx[8] == pytest.approx(8.0)
    assert tx[9] == 9.0


def test_anticipation_on_still_object(walker):
    """An object that does not move is left alone."""
    anticipation_follow_through(walker, 2)
    assert _tx(walker, 2) == [-12.0] * 10


def test_wobble(walker):
    """Wobble rotates in place by up to the amplitude."""
    motion_texture(walker, 1, "wobble", amplitude=10.0, period=12.0)
    obj = walker.get(1)
    assert obj.keyframes[3].params.theta == pytest.approx(math.radians(10.0))
    assert obj.keyframes[3].params.tx == pytest.approx(3.0, abs=1e-9)
    assert obj.keyframes[0].params.theta == pytest.approx(0.0)


def test_pulse(walker):
    """Pulse scales about the center."""
    motion_texture(walker, 1, "pulse", amplitude=0.5, period=12.0)
    params = walker.get(1).keyframes[3].params
    assert (params.sx, params.sy) == pytest.approx((1.5, 1.5))
    assert params.tx == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize("kwargs", [{"kind": "spin"}, {"period": 0.0},
                                    {"kind": "pulse", "amplitude": 1.0}])
def test_motion_texture_errors(walker, kwargs):
    """Unknown kinds and collapsing parameters are refused."""
    with pytest.raises(ValueError):
        motion_texture(walker, 1, **kwargs)


def test_recolor(walker):
    """The dominant color moves onto the requested one."""
    recolor(walker, 1, BLUE)
    assert np.allclose(walker.get(1).canonical[..., :3], BLUE)
    assert np.allclose(walker.get(2).canonical[..., :3], BLUE)
