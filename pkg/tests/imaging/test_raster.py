import re

import numpy as np
import pytest

from motionvec.exceptions import DimensionMismatchError, EmptyMaskError, FrameIOError
from motionvec.imaging.raster import (FRAME_PATTERN, as_raster, check_same_size, mask_area,
                                      mask_bbox, mask_centroid, read_frames, read_label_png,
                                      read_png, write_frames, write_label_png, write_png)


def test_as_raster_accepts_rgb_and_rgba():
    """Three and four channel images in [0, 1] are valid."""
    assert as_raster(np.zeros((2, 3, 3))).shape == (2, 3, 3)
    assert as_raster(np.ones((2, 3, 4))).dtype == np.float64


@pytest.mark.parametrize("bad", [np.zeros((4, 4)), np.zeros((4, 4, 2)),
                                 np.full((2, 2, 3), 1.5), np.full((2, 2, 3), np.nan)])
def test_as_raster_rejects(bad):
    """Wrong shapes, out-of-range and non-finite values are rejected."""
    with pytest.raises(ValueError):
        as_raster(bad)


def test_check_same_size():
    """Only height and width are compared."""
    check_same_size(np.zeros((4, 5, 3)), np.zeros((4, 5), dtype=bool))
    with pytest.raises(DimensionMismatchError, match="Frames"):
        check_same_size(np.zeros((4, 5)), np.zeros((5, 4)), "Frames")


def test_mask_geometry():
    """Area, inclusive bbox and centroid of a rectangle."""
    m = np.zeros((10, 10), dtype=bool)
    m[2:5, 3:8] = True
    assert mask_area(m) == 15
    assert mask_bbox(m) == (3, 2, 7, 4)
    assert np.allclose(mask_centroid(m), [5.0, 3.0])


def test_mask_geometry_empty():
    """An empty mask has no bbox or centroid."""
    m = np.zeros((3, 3), dtype=bool)
    assert mask_area(m) == 0
    with pytest.raises(EmptyMaskError):
        mask_bbox(m)
    with pytest.raises(EmptyMaskError):
        mask_centroid(m)


def test_png_round_trip_quantizes(tmp_path):
    """Values come back within half an 8-bit step."""
    rng = np.random.default_rng(0)
    img = rng.random((6, 7, 3))
    write_png(tmp_path / "a.png", img)
    back = read_png(tmp_path / "a.png")
    assert back.shape == (6, 7, 3)
    assert np.max(np.abs(back - img)) <= 0.5 / 255 + 1e-12


def test_png_alpha(tmp_path):
    """RGBA is preserved when asked for, dropped otherwise."""
    img = np.zeros((4, 4, 4))
    img[..., 3] = 1.0
    img[0, 0, 3] = 0.0
    write_png(tmp_path / "a.png", img)
    assert read_png(tmp_path / "a.png").shape == (4, 4, 3)
    rgba = read_png(tmp_path / "a.png", keep_alpha=True)
    assert rgba[0, 0, 3] == 0.0
    assert rgba[1, 1, 3] == 1.0


def test_read_png_missing(tmp_path):
    """A missing file raises FrameIOError naming it."""
    with pytest.raises(FrameIOError, match="nothing.png"):
        read_png(tmp_path / "nothing.png")


def test_frames_numeric_order(tmp_path):
    """Frames are read by frame number, not directory order."""
    frames = [np.full((3, 3, 3), v) for v in (0.0, 0.5, 1.0)]
    paths = write_frames(tmp_path, frames)
    assert paths[1].name == FRAME_PATTERN.format(1) == "frame_00001.png"
    (tmp_path / "notes.txt").write_text("ignored")
    back = read_frames(tmp_path)
    assert [round(float(f[0, 0, 0]), 2) for f in back] == [0.0, 0.5, 1.0]


def test_read_frames_empty_dir_names_path(tmp_path):
    """An empty directory is an error that names the directory."""
    with pytest.raises(FrameIOError, match=re.escape(str(tmp_path))):
        read_frames(tmp_path)


def test_read_frames_size_mismatch(tmp_path):
    """All frames must share one size."""
    write_png(tmp_path / "frame_00000.png", np.zeros((3, 3, 3)))
    write_png(tmp_path / "frame_00001.png", np.zeros((4, 3, 3)))
    with pytest.raises(FrameIOError, match="has size"):
        read_frames(tmp_path)


def test_label_png_is_16_bit(tmp_path):
    """Label ids above 255 survive."""
    labels = np.zeros((5, 5), dtype=np.int64)
    labels[1:3, 1:3] = 300
    labels[4, 4] = 7
    write_label_png(tmp_path / "l.png", labels)
    assert np.array_equal(read_label_png(tmp_path / "l.png"), labels)


def test_label_png_range():
    """Negative labels are rejected before writing."""
    with pytest.raises(ValueError):
        write_label_png("unused.png", np.array([[-1]]))
