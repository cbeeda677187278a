"""Scoring tracking decisions against a scene's ground truth."""
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..exceptions import LogMismatchError
from ..imaging.raster import BinaryMask
from ..tracking.mapping import MAPPING_TYPES
from ..tracking.propagation import MappingRecord
from ..tracking.tracker import TrackingResult
from .scene import SyntheticScene

__all__ = ["TrackingErrors", "match_object", "compare_tracking", "compare_result"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrackingErrors:
    """Tracking error counts.

    Attributes:
        total: Ground-truth decisions the tracker did not reproduce.
        by_type: The same count per true mapping type, in MAPPING_TYPES order.
    """
    total: int
    by_type: tuple[int, ...]

    def as_dict(self) -> dict[str, int]:
        return {str(m): n for m, n in zip(MAPPING_TYPES, self.by_type)}


def match_object(mask: BinaryMask | None, truth: Mapping[int, BinaryMask]) -> int | None:
    """Truth id whose visible pixels overlap a predicted mask most (lowest id on ties)."""
    if mask is None:
        return None
    best, best_overlap = None, 0
    for truth_id in sorted(truth):
        overlap = int(np.count_nonzero(mask & truth[truth_id]))
        if overlap > best_overlap:
            best, best_overlap = truth_id, overlap
    return best


def compare_tracking(predicted: Sequence[MappingRecord],
                     predicted_masks: Mapping[int, Mapping[int, BinaryMask]],
                     truth: Sequence[MappingRecord],
                     truth_labels: Sequence[Mapping[int, BinaryMask]],
                     num_frames: int) -> TrackingErrors:
    """Count ground-truth decisions with no matching predicted decision.

    Predicted object ids are translated to truth ids frame by frame through
    their labeled pixels. A truth decision at frame t is reproduced when a
    predicted decision at t has the same mapping type, its objects
    translate (at t - 1) to the truth objects and its results translate
    (at t) to the truth results. Extra predicted decisions are not counted.

    Args:
        predicted: Tracker decisions.
        predicted_masks: Predicted object id -> frame -> labeled pixels.
        truth: Ground-truth decisions.
        truth_labels: Per frame, truth id -> visible pixels.
        num_frames: Frames in the clip.

    Raises:
        LogMismatchError: If either log or the truth labels do not cover
            the same frames.
    """
    if len(truth_labels) != num_frames:
        raise LogMismatchError(f"Truth labels cover {len(truth_labels)} frames, "
                               f"expected {num_frames}")
    for name, log in (("predicted", predicted), ("truth", truth)):
        outside = sorted({r.t for r in log if not 1 <= r.t < num_frames})
        if outside:
            raise LogMismatchError(f"The {name} log has decisions at frames {outside} "
                                   f"outside 1..{num_frames - 1}")

    def translate(ids: Sequence[int], frame: int) -> frozenset[int | None]:
        return frozenset(match_object(predicted_masks.get(i, {}).get(frame), truth_labels[frame])
                         for i in ids)

    reproduced: dict[int, set[tuple]] = {}
    for p in predicted:
        reproduced.setdefault(p.t, set()).add(
            (p.mtype, translate(p.objects, p.t - 1), translate(p.results, p.t)))

    counts = [0] * len(MAPPING_TYPES)
    for r in truth:
        key = (r.mtype, frozenset(r.objects), frozenset(r.results))
        if key not in reproduced.get(r.t, set()):
            counts[MAPPING_TYPES.index(r.mtype)] += 1
            logger.debug("Frame %d: missed %s %s -> %s", r.t, r.mtype, r.objects, r.results)
    errors = TrackingErrors(sum(counts), tuple(counts))
    logger.info("Tracking errors: %d %s", errors.total, errors.by_type)
    return errors


def compare_result(result: TrackingResult, scene: SyntheticScene) -> TrackingErrors:
    """compare_tracking for a tracker run on a generated scene.

    Ids folded into a merged object are matched through their own masks.
    """
    masks = {object_id: {f: p.mask for f, p in obj.timeline.items()}
             for object_id, obj in result.objects.items()}
    for obj in result.objects.values():
        masks.update(obj.parts)
    return compare_tracking(result.records, masks, scene.truth, scene.labels,
                            len(scene.frames))
