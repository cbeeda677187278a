import numpy as np
import pytest

from motionvec.configuration.module_configs import EventConfig
from motionvec.diffcomp.affine import AffineParams
from motionvec.exceptions import RangeError, UnknownObjectError
from motionvec.program.model import Keyframe
from motionvec.xform.queries import (boundary_contact, dominant_color, event_query,
                                     object_support, prop_query)

from .conftest import BLUE, RED, make_program, solid


def test_position_and_velocity(walker):
    """Position is the transformed center; velocity its per-frame change."""
    position = prop_query(walker, 1, "position")
    assert position.frames == list(range(10))
    assert position.at(3) == pytest.approx((22.5, 14.5))
    velocity = prop_query(walker, 1, "velocity", (0, 9))
    assert all(v == pytest.approx((1.0, 0.0)) for v in velocity.values)


def test_size_follows_scale(walker):
    """Size is the extent of the transformed canonical image."""
    walker.set_keyframe(1, Keyframe(2, AffineParams(sx=2.0, sy=0.5), 0))
    size = prop_query(walker, 1, "size")
    assert size.at(0) == pytest.approx((4.0, 4.0))
    assert size.at(2) == pytest.approx((8.0, 2.0))


def test_color_is_dominant_cluster():
    """The color of a two-tone image is its larger cluster."""
    image = solid(RED, size=6)
    image[:2, :2, :3] = BLUE
    color, members = dominant_color(image)
    assert color == pytest.approx(RED)
    assert members.sum() == 32
    program = make_program({1: (RED, [0.0, 1.0])})
    assert prop_query(program, 1, "color").values == [pytest.approx(RED)] * 2


def test_all_lists_present_objects(walker):
    """prop 'all' gives the visible ids of every frame."""
    walker.get(2).keyframes[5].visible = False
    series = prop_query(walker, None, "all", (4, 6))
    assert series.frames == [4, 5, 6]
    assert series.values == [[1, 2], [1], [1, 2]]


def test_prop_query_errors(walker):
    """Unknown properties, objects and ranges are refused."""
    with pytest.raises(ValueError, match="Unknown property"):
        prop_query(walker, 1, "speed")
    with pytest.raises(UnknownObjectError):
        prop_query(walker, 7, "position")
    with pytest.raises(RangeError):
        prop_query(walker, 1, "position", (0, 12))


def test_held_runs():
    """Runs of unchanged params of two or more frames are held."""
    program = make_program({1: (RED, [0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 3.0])})
    events = event_query(program, 1, "held")
    assert [e.frames for e in events] == [(0, 1, 2), (4, 5)]
    assert [e.frame for e in events] == [0, 4]
    assert event_query(program, 1, "held", (2, 4)) == []


def test_motion_cycle_period(swinging):
    """A sinusoidal swing reports its period."""
    events = event_query(swinging, 1, "motionCycle")
    assert len(events) == 1
    assert events[0].period == pytest.approx(24, abs=1)


def test_no_cycle_for_linear_motion(walker):
    """Steady motion or stillness has no cycle."""
    assert event_query(walker, 1, "motionCycle") == []
    assert event_query(walker, 2, "motionCycle") == []


def test_boundary_contact():
    """Closest boundary points of two masks; overlap means distance 0."""
    a = np.zeros((10, 10), dtype=bool)
    b = np.zeros((10, 10), dtype=bool)
    a[2:5, 1:4] = True
    b[2:5, 6:9] = True
    distance, on_a, on_b = boundary_contact(a, b)
    assert distance == 3.0
    assert on_a[0] == 3.0 and on_b[0] == 6.0
    assert on_a[1] == on_b[1]
    b[3, 3] = True
    assert boundary_contact(a, b) == (0.0, (3.0, 3.0), (3.0, 3.0))
    assert boundary_contact(a, np.zeros_like(a)) is None


def test_object_support(bounce):
    """Support is the object's rendered footprint."""
    support = object_support(bounce, bounce.get(2), 0)
    assert support.sum() == 16
    ys, xs = np.nonzero(support)
    assert (xs.min(), xs.max(), ys.min(), ys.max()) == (18, 21, 13, 16)


def test_collision_at_turnaround(bounce):
    """Touching plus a velocity reversal is one collision at the contact frame."""
    events = event_query(bounce, 1, "collision")
    assert len(events) == 1
    event = events[0]
    assert event.frame == 4 and event.frames == (4,)
    assert event.others == (2,)
    (ax, ay), (bx, by) = event.contacts
    assert (ax, bx) == (17.0, 18.0)
    assert ay == by
    mirrored = event_query(bounce, 2, "collision")
    assert [(e.frame, e.others) for e in mirrored] == [(4, (1,))]


def test_touch_without_reaction_is_no_collision():
    """Passing close at constant velocity is not a collision."""
    program = make_program({1: (RED, [-8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0]),
                            2: (BLUE, [(0.0, 6.0)] * 7)})
    assert event_query(program, 1, "collision", cfg=EventConfig(contact_distance=4.0)) == []


def test_event_query_errors(walker):
    """Unknown kinds are refused."""
    with pytest.raises(ValueError, match="event kind"):
        event_query(walker, 1, "jump")
