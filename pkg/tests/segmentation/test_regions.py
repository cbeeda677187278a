import numpy as np
import pytest

from motionvec.configuration.module_configs import SegmentationConfig
from motionvec.segmentation.regions import (Region, extract_regions, label_image,
                                            regions_from_labels)

from .conftest import RED


def test_two_disjoint_squares(two_squares_frame):
    """Without edges each square is one region, biggest first."""
    frame, small, big = two_squares_frame
    fg = small | big
    regions = extract_regions(frame, fg, np.zeros_like(fg), frame_index=3)
    assert [r.region_id for r in regions] == [1, 2]
    assert np.array_equal(regions[0].mask, big)
    assert np.array_equal(regions[1].mask, small)
    assert regions[0].frame_index == 3
    assert regions[0].area == 49
    assert regions[0].bbox == (18, 15, 24, 21)
    assert regions[1].centroid == (4.0, 4.0)


def test_edge_line_separates_touching_blocks():
    """An edge line through one colour block splits it in two."""
    frame = np.ones((24, 24, 3))
    fg = np.zeros((24, 24), dtype=bool)
    fg[4:20, 2:22] = True
    frame[fg] = RED
    edges = np.zeros_like(fg)
    edges[4:20, 11] = True
    regions = extract_regions(frame, fg, edges)
    assert len(regions) == 2
    union = np.zeros_like(fg)
    for r in regions:
        union |= r.mask
        cols = np.nonzero(r.mask)[1]
        assert cols.max() <= 11 or cols.min() >= 11
    assert np.array_equal(union, fg)


def test_components_mode_ignores_edges():
    """Components mode keeps a connected block whole."""
    frame = np.ones((24, 24, 3))
    fg = np.zeros((24, 24), dtype=bool)
    fg[4:20, 2:22] = True
    edges = np.zeros_like(fg)
    edges[4:20, 11] = True
    regions = extract_regions(frame, fg, edges, SegmentationConfig(mode="components"))
    assert len(regions) == 1


def test_empty_foreground():
    """No foreground, no regions."""
    frame = np.ones((8, 8, 3))
    empty = np.zeros((8, 8), dtype=bool)
    assert extract_regions(frame, empty, empty) == []


def test_small_specks_dropped(two_squares_frame):
    """Isolated pieces below min_area disappear."""
    frame, small, big = two_squares_frame
    fg = small | big
    regions = extract_regions(frame, fg, np.zeros_like(fg), SegmentationConfig(min_area=30))
    assert len(regions) == 1
    assert np.array_equal(regions[0].mask, big)


def test_regions_disjoint_and_inside_foreground(red_square_frame):
    """Regions never overlap and never leave the foreground."""
    frame, square = red_square_frame
    edges = np.zeros_like(square)
    edges[6:16, 12] = True
    edges[0, 0] = True
    labels = label_image(frame, square, edges)
    regions = regions_from_labels(labels)
    total = sum(r.area for r in regions)
    assert total == np.count_nonzero(labels)
    assert not (labels.astype(bool) & ~square).any()


def test_regions_from_labels_keeps_ids():
    """Label values become region ids."""
    labels = np.zeros((4, 4), dtype=np.int64)
    labels[0, 0] = 5
    labels[3, 3] = 2
    assert [r.region_id for r in regions_from_labels(labels, 7)] == [2, 5]


def test_region_from_empty_mask():
    """A region needs pixels."""
    with pytest.raises(ValueError):
        Region.from_mask(0, 1, np.zeros((2, 2), dtype=bool))
