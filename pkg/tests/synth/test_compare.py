import dataclasses

import numpy as np
import pytest

from motionvec.exceptions import LogMismatchError
from motionvec.synth.compare import compare_tracking, match_object
from motionvec.synth.scene import generate_scene
from motionvec.tracking.mapping import MAPPING_TYPES, MappingType


@pytest.fixture
def merge_scene(merge_script):
    return generate_scene(merge_script)


def _masks(scene, rename=None):
    rename = rename or {}
    out = {}
    for t, labels in enumerate(scene.labels):
        for truth_id, mask in labels.items():
            out.setdefault(rename.get(truth_id, truth_id), {})[t] = mask
    return out


def _renamed(records, rename):
    return [dataclasses.replace(r, objects=tuple(rename.get(i, i) for i in r.objects),
                                results=tuple(rename.get(i, i) for i in r.results))
            for r in records]


def test_truth_against_itself(merge_scene):
    """The truth reproduces itself with zero errors."""
    errors = compare_tracking(merge_scene.truth, _masks(merge_scene), merge_scene.truth,
                              merge_scene.labels, 6)
    assert errors.total == 0
    assert errors.by_type == (0,) * len(MAPPING_TYPES)


def test_ids_are_matched_by_pixels(merge_scene):
    """Predicted ids need not equal truth ids."""
    rename = {1: 11, 2: 12, 3: 13}
    errors = compare_tracking(_renamed(merge_scene.truth, rename),
                              _masks(merge_scene, rename), merge_scene.truth,
                              merge_scene.labels, 6)
    assert errors.total == 0


def test_missed_and_wrong_decisions(merge_scene):
    """Dropped or mistyped decisions count against the true type."""
    predicted = [r for r in merge_scene.truth if r.mtype != MappingType.MANY_TO_ONE_MERGE]
    predicted = [dataclasses.replace(r, mtype=MappingType.APPEAR) if r.t == 5 else r
                 for r in predicted]
    errors = compare_tracking(predicted, _masks(merge_scene), merge_scene.truth,
                              merge_scene.labels, 6)
    assert errors.total == 2
    counts = errors.as_dict()
    assert counts["many-to-one-merge"] == 1
    assert counts["one-to-one"] == 1
    assert counts["appear"] == 0


def test_extra_predictions_are_free(merge_scene):
    """Decisions absent from the truth are not counted."""
    extra = dataclasses.replace(merge_scene.truth[0], mtype=MappingType.APPEAR)
    errors = compare_tracking(merge_scene.truth + [extra], _masks(merge_scene),
                              merge_scene.truth, merge_scene.labels, 6)
    assert errors.total == 0


def test_log_coverage_errors(merge_scene):
    """Logs and labels must cover the clip's frames."""
    masks = _masks(merge_scene)
    with pytest.raises(LogMismatchError, match="Truth labels"):
        compare_tracking(merge_scene.truth, masks, merge_scene.truth,
                         merge_scene.labels[:5], 6)
    late = dataclasses.replace(merge_scene.truth[0], t=6)
    with pytest.raises(LogMismatchError, match="predicted"):
        compare_tracking([late], masks, merge_scene.truth, merge_scene.labels, 6)
    with pytest.raises(LogMismatchError, match="truth"):
        compare_tracking([], masks, [dataclasses.replace(late, t=0)], merge_scene.labels, 6)


def test_match_object():
    """The largest overlap wins; ties go to the lower id."""
    mask = np.zeros((4, 4), dtype=bool)
    mask[:2] = True
    left = np.zeros_like(mask)
    left[:, :2] = True
    right = np.zeros_like(mask)
    right[:, 2:] = True
    top = np.zeros_like(mask)
    top[0, 0] = True
    assert match_object(mask, {5: left, 3: right}) == 3
    assert match_object(mask, {5: left, 4: top}) == 5
    assert match_object(mask, {1: ~mask}) is None
    assert match_object(None, {1: mask}) is None
