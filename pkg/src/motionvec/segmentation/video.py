"""Whole-video segmentation and manual label overrides."""
import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ..configuration.module_configs import ImagingConfig, SegmentationConfig
from ..configuration.pipeline_config import worker_count
from ..exceptions import DimensionMismatchError, FrameIOError
from ..imaging.color import luminance
from ..imaging.edges import detect_edges
from ..imaging.raster import RasterImage, read_label_png
from .background import BackgroundModel, estimate_background, foreground_mask
from .regions import Region, extract_regions, regions_from_labels

__all__ = ["read_label_overrides", "segment_frame", "segment_video"]

logger = logging.getLogger(__name__)


def read_label_overrides(directory: str | Path) -> dict[int, NDArray[np.int64]]:
    """Load ``frame_%05d.png`` 16-bit label images keyed by frame index.

    Raises:
        FrameIOError: If the directory is missing or holds no label images.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FrameIOError(f"Label directory {directory} does not exist")
    overrides = {}
    for path in sorted(directory.glob("frame_*.png")):
        index = int(path.stem.split("_")[-1])
        overrides[index] = read_label_png(path)
    if not overrides:
        raise FrameIOError(f"No frame_%05d.png label images in {directory}")
    logger.info("Loaded %d manual label images from %s", len(overrides), directory)
    return overrides


def segment_frame(frame: RasterImage, index: int, background: BackgroundModel,
                  seg_cfg: SegmentationConfig, img_cfg: ImagingConfig) -> list[Region]:
    fg = foreground_mask(frame, background)
    edges = detect_edges(luminance(frame), low=img_cfg.canny_low,
                         high=img_cfg.canny_high, sigma=img_cfg.canny_sigma)
    regions = extract_regions(frame, fg, edges, seg_cfg, frame_index=index)
    if not regions:
        logger.warning("Frame %d has no foreground regions", index)
    return regions


def segment_video(frames: Sequence[RasterImage],
                  seg_cfg: SegmentationConfig | None = None,
                  img_cfg: ImagingConfig | None = None,
                  background: BackgroundModel | None = None,
                  overrides: Mapping[int, np.ndarray] | None = None
                  ) -> tuple[BackgroundModel, list[list[Region]]]:
    """Background estimation once, then regions for every frame.

    Frames with a manual label image use it instead of extract_regions.
    Frames are segmented in a thread pool capped by MOTIONVEC_THREADS.

    Raises:
        DimensionMismatchError: If a label image differs in size from its frame.
    """
    seg_cfg = seg_cfg or SegmentationConfig()
    img_cfg = img_cfg or ImagingConfig()
    overrides = dict(overrides or {})
    if background is None:
        background = estimate_background(frames, seg_cfg)

    def one(index: int) -> list[Region]:
        frame = frames[index]
        if index in overrides:
            labels = overrides[index]
            if labels.shape != frame.shape[:2]:
                raise DimensionMismatchError(
                    f"Label image for frame {index} is {labels.shape}, "
                    f"frame is {frame.shape[:2]}")
            return regions_from_labels(labels, index)
        regions = segment_frame(frame, index, background, seg_cfg, img_cfg)
        logger.info("Segmented frame %d: %d regions", index, len(regions))
        return regions

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        per_frame = list(pool.map(one, range(len(frames))))
    return background, per_frame
