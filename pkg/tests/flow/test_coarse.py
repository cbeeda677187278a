import numpy as np
import pytest

from motionvec.exceptions import EmptyMaskError
from motionvec.flow.coarse import CoarseWeight, coarse_weight, flow_overlap


def _frame_with_square(x0, y0, size=6, shape=(24, 24)):
    img = np.ones(shape + (3,))
    mask = np.zeros(shape, dtype=bool)
    mask[y0:y0 + size, x0:x0 + size] = True
    img[mask] = [0.2, 0.5, 0.8]
    return img, mask


def test_weight_is_product():
    """w multiplies the three components."""
    assert CoarseWeight(0.5, 0.5, 0.5).w == pytest.approx(0.125)


def test_identical_object_and_region():
    """A static object matches its own region perfectly."""
    img, mask = _frame_with_square(5, 5)
    zero = np.zeros((24, 24, 2))
    weight = coarse_weight(mask, img, mask, img, zero, zero)
    assert weight.w_shape == pytest.approx(1.0)
    assert weight.w_color == pytest.approx(1.0)
    assert weight.w_flow == pytest.approx(1.0)
    assert weight.w == pytest.approx(1.0)


def test_flow_explains_motion():
    """Flow overlap follows the displacement the flow predicts."""
    obj = np.zeros((10, 10), dtype=bool)
    obj[2:4, 2:4] = True
    region = np.roll(obj, 3, axis=1)
    fwd = np.zeros((10, 10, 2))
    fwd[..., 0] = 3.0
    bwd = -fwd
    assert flow_overlap(obj, region, fwd, bwd) == pytest.approx(1.0)
    zero = np.zeros((10, 10, 2))
    assert flow_overlap(obj, region, zero, zero) == pytest.approx(0.0)


def test_flow_overlap_half():
    """Half-overlapping squares score one half."""
    obj = np.zeros((10, 10), dtype=bool)
    obj[2:6, 2:6] = True
    region = np.roll(obj, 2, axis=1)
    zero = np.zeros((10, 10, 2))
    assert flow_overlap(obj, region, zero, zero) == pytest.approx(0.5)


def test_flow_overlap_all_advected_away():
    """Masks pushed out of frame give zero, not a division error."""
    obj = np.zeros((6, 6), dtype=bool)
    obj[0, 0] = True
    away = np.full((6, 6, 2), -10.0)
    assert flow_overlap(obj, obj, away, away) == 0.0


def test_color_change_lowers_weight():
    """A differently colored region has w_color below one."""
    img, mask = _frame_with_square(5, 5)
    other = img.copy()
    other[mask] = [0.9, 0.1, 0.1]
    zero = np.zeros((24, 24, 2))
    weight = coarse_weight(mask, img, mask, other, zero, zero)
    assert weight.w_color < 0.5
    assert weight.w_shape == pytest.approx(1.0)


def test_empty_masks_rejected():
    """Both masks must have pixels."""
    img, mask = _frame_with_square(5, 5)
    zero = np.zeros((24, 24, 2))
    with pytest.raises(EmptyMaskError):
        coarse_weight(np.zeros_like(mask), img, mask, img, zero, zero)
