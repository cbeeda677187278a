import numpy as np
import pytest

from motionvec.exceptions import EmptyMaskError, TooManyLevelsError
from motionvec.imaging.edges import detect_edges
from motionvec.imaging.pyramid import (downsample2, image_pyramid, max_pyramid_levels)
from motionvec.imaging.shape import (cosine_similarity, efd_of_contour, efd_of_mask,
                                     largest_component, trace_outer_contour)


def _disc(size=64, radius=20.0, center=None):
    c = (size - 1) / 2.0 if center is None else center
    yy, xx = np.mgrid[:size, :size]
    return (xx - c) ** 2 + (yy - c) ** 2 <= radius ** 2


def test_constant_image_has_no_edges():
    """Zero gradient means no edges, borders included."""
    assert not detect_edges(np.full((16, 16), 0.4)).any()


def test_vertical_step_gives_vertical_line():
    """An ideal step is found at the step and nowhere else."""
    lum = np.zeros((16, 16))
    lum[:, 8:] = 1.0
    edges = detect_edges(lum)
    cols = set(np.nonzero(edges)[1].tolist())
    assert cols and cols <= {7, 8}
    assert all(edges[r].any() for r in range(2, 14))


def test_disc_edges_follow_circle():
    """Edge pixels lie within a pixel and a half of the analytic circle."""
    lum = _disc(32, 10.0).astype(np.float64)
    ys, xs = np.nonzero(detect_edges(lum))
    dist = np.hypot(xs - 15.5, ys - 15.5)
    assert len(dist) > 20
    assert np.all(np.abs(dist - 10.0) <= 1.5)


def test_edges_argument_checks():
    """Colour input and reversed thresholds are rejected."""
    with pytest.raises(ValueError):
        detect_edges(np.zeros((4, 4, 3)))
    with pytest.raises(ValueError):
        detect_edges(np.zeros((4, 4)), low=0.3, high=0.2)


def test_largest_component():
    """The bigger of two blobs wins."""
    m = np.zeros((10, 10), dtype=bool)
    m[0:2, 0:2] = True
    m[5:9, 5:9] = True
    big = largest_component(m)
    assert big.sum() == 16 and not big[0, 0]
    with pytest.raises(EmptyMaskError):
        largest_component(np.zeros((3, 3), dtype=bool))


def test_trace_square_clockwise():
    """A 3x3 block traces its 8 boundary pixels clockwise from the top-left."""
    m = np.zeros((7, 8), dtype=bool)
    m[2:5, 3:6] = True
    contour = trace_outer_contour(m)
    expected = [(3, 2), (4, 2), (5, 2), (5, 3), (5, 4), (4, 4), (3, 4), (3, 3)]
    assert [tuple(p) for p in contour.astype(int).tolist()] == expected


def test_trace_single_pixel():
    """An isolated pixel is its own contour."""
    m = np.zeros((3, 3), dtype=bool)
    m[1, 1] = True
    assert trace_outer_contour(m).tolist() == [[1.0, 1.0]]


def test_efd_self_similarity_and_length():
    """Descriptors are unit vectors of 4 coefficients per harmonic."""
    d = efd_of_mask(_disc(), orders=36)
    assert d.shape == (144,)
    assert np.linalg.norm(d) == pytest.approx(1.0)
    assert cosine_similarity(d, d) == pytest.approx(1.0)


def test_efd_translation_invariant():
    """Moving a shape does not change its descriptor."""
    m = np.zeros((40, 40), dtype=bool)
    m[5:15, 5:25] = True
    m[15:20, 5:10] = True
    moved = np.roll(np.roll(m, 12, axis=0), 9, axis=1)
    assert np.allclose(efd_of_mask(m), efd_of_mask(moved))


def test_efd_distinguishes_shapes():
    """A square and a disc have different descriptors."""
    square = np.zeros((64, 64), dtype=bool)
    square[12:52, 12:52] = True
    sim = cosine_similarity(efd_of_mask(square), efd_of_mask(_disc()))
    assert sim < 0.999


def test_efd_tiny_contours():
    """Points and segments still produce a descriptor."""
    assert np.linalg.norm(efd_of_contour(np.array([[2.0, 3.0]]), orders=4)) == \
        pytest.approx(1.0)
    with pytest.raises(EmptyMaskError):
        efd_of_contour(np.zeros((0, 2)))


def test_cosine_similarity_zero_vector():
    """A zero descriptor is dissimilar to everything."""
    assert cosine_similarity(np.zeros(4), np.ones(4)) == 0.0


def test_pyramid_single_level_is_input():
    """One level is just the image."""
    img = np.random.default_rng(0).random((8, 8, 3))
    levels = image_pyramid(img, 1)
    assert len(levels) == 1 and np.array_equal(levels[0], img)


def test_pyramid_preserves_constants():
    """Box filtering keeps a constant image constant."""
    for level in image_pyramid(np.full((32, 24, 3), 0.3), 3):
        assert np.allclose(level, 0.3)


def test_checkerboard_averages_to_half():
    """A 1-px checkerboard halves to uniform 0.5."""
    board = (np.indices((8, 8)).sum(axis=0) % 2).astype(np.float64)
    small = image_pyramid(board, 2)[1]
    assert small.shape == (4, 4)
    assert np.allclose(small, 0.5)


def test_odd_sizes_fold_last_row():
    """An odd row joins the last output row."""
    img = np.arange(5, dtype=np.float64).reshape(5, 1) * np.ones((1, 4))
    small = downsample2(img)
    assert small.shape == (2, 2)
    assert np.allclose(small[:, 0], [0.5, 3.0])


def test_too_many_levels():
    """Levels may not shrink the image below 4 px."""
    with pytest.raises(TooManyLevelsError):
        image_pyramid(np.zeros((8, 8)), 3)
    with pytest.raises(ValueError):
        image_pyramid(np.zeros((8, 8)), 0)


def test_max_pyramid_levels():
    """64 px halves down to 4 px in five levels."""
    assert max_pyramid_levels(64, 64) == 5
    assert max_pyramid_levels(8, 100) == 2
    assert max_pyramid_levels(5, 5) == 1
