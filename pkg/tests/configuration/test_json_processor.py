import json
from enum import Enum

import numpy as np
import pytest

from motionvec.configuration.json_processor import (_Markers, dumpjs, from_json_tree,
                                                    loadjs, to_json_tree)
from motionvec.configuration.module_configs import DcConfig
from motionvec.diffcomp.affine import AffineParams
from motionvec.exceptions import ParseError
from motionvec.tracking.mapping import MappingType


class Color(Enum):
    RED = 1
    BLUE = 2


def test_primitives_pass_through():
    """Plain JSON values are unchanged."""
    for value in [None, True, 3, 2.5, "s"]:
        assert to_json_tree(value) == value
        assert from_json_tree(value) == value


def test_numpy_scalars_become_python():
    """Numpy scalars serialize as their Python equivalents."""
    assert to_json_tree(np.float32(1.5)) == 1.5
    assert to_json_tree(np.int64(7)) == 7
    assert to_json_tree(np.bool_(True)) is True


def test_tuple_and_dict_markers():
    """Tuples and dicts are tagged so they come back as the same type."""
    tree = to_json_tree({"a": (1, 2)})
    assert tree == {_Markers.DICT: {"a": {_Markers.TUPLE: [1, 2]}}}
    assert from_json_tree(tree) == {"a": (1, 2)}


def test_array_is_bit_exact():
    """Float arrays survive a round trip bit for bit."""
    rng = np.random.default_rng(3)
    a = rng.random((5, 4, 4))
    b = loadjs(dumpjs(a))
    assert b.dtype == a.dtype
    assert b.shape == a.shape
    assert np.array_equal(a.view(np.uint64), b.view(np.uint64))


def test_bool_array_round_trip():
    """Masks keep their dtype."""
    m = np.zeros((3, 3), dtype=bool)
    m[1, 1] = True
    back = loadjs(dumpjs(m))
    assert back.dtype == bool
    assert np.array_equal(back, m)


def test_unsupported_array_dtype():
    """Complex arrays are not part of the format."""
    with pytest.raises(TypeError, match="Unsupported array dtype"):
        to_json_tree(np.zeros(2, dtype=np.complex128))


def test_get_params_objects_round_trip():
    """Objects with get_params rebuild through their constructor."""
    cfg = DcConfig(tau=0.2, max_iters=10)
    back = loadjs(dumpjs(cfg))
    assert isinstance(back, DcConfig)
    assert back == cfg
    params = AffineParams(tx=1.0, theta=0.25)
    assert loadjs(dumpjs(params)) == params


def test_str_enum_serializes_as_value():
    """String enums are stored as their plain value."""
    assert to_json_tree(MappingType.APPEAR) == "appear"
    assert loadjs(dumpjs(MappingType.APPEAR)) == MappingType.APPEAR


def test_foreign_module_refused():
    """Only motionvec classes may be imported when loading."""
    tree = to_json_tree(Color.RED)
    assert tree[_Markers.MODULE] == __name__
    with pytest.raises(ParseError, match="Refusing to import"):
        from_json_tree(tree)


def test_non_string_keys_rejected():
    """Dict keys must be strings."""
    with pytest.raises(TypeError, match="Dict keys must be str"):
        to_json_tree({1: "a"})


def test_cycle_detected():
    """Self-referencing lists are rejected."""
    a = []
    a.append(a)
    with pytest.raises(RecursionError):
        to_json_tree(a)


def test_dumpjs_is_byte_stable():
    """Key order of the input does not change the output."""
    assert dumpjs({"b": 1, "a": 2}) == dumpjs({"a": 2, "b": 1})


def test_invalid_json_reports_position():
    """Syntax errors carry line and column."""
    with pytest.raises(ParseError) as info:
        loadjs('{\n  "a": ,\n}')
    assert info.value.line == 2
    assert info.value.column is not None


def test_corrupt_array_payload():
    """A damaged array block names its field path."""
    tree = to_json_tree({"img": np.zeros(4)})
    tree[_Markers.DICT]["img"][_Markers.NDARRAY]["shape"] = [5]
    with pytest.raises(ParseError) as info:
        from_json_tree(tree)
    assert info.value.field == "$.img"


def test_loadjs_rejects_object_hook():
    """Custom hooks would bypass marker decoding."""
    with pytest.raises(ValueError):
        loadjs("{}", object_hook=dict)


def test_loadjs_requires_str():
    """Bytes are not accepted."""
    with pytest.raises(TypeError):
        loadjs(b"{}")


def test_plain_objects_pass_through():
    """Hand-written JSON objects without markers load as plain dicts."""
    assert loadjs(json.dumps({"x": [1, {"y": 2}]})) == {"x": [1, {"y": 2}]}
