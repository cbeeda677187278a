import json

import numpy as np
import pytest

from motionvec.exceptions import FrameIOError, ParseError, UnknownObjectError
from motionvec.imaging.raster import write_png
from motionvec.program.render import render_frame
from motionvec.xform.opsfile import apply_ops, parse_ops, read_ops, select_objects

from .conftest import BLUE, RED, solid


def _ops(*blocks):
    return parse_ops(json.dumps({"ops": list(blocks)}))


def test_parse_forms():
    """Both the bare list and the ops object parse; single calls become lists."""
    block = {"select": {"ids": [1]}, "apply": {"op": "delete_object"}}
    from_list = parse_ops(json.dumps([block]))
    from_object = parse_ops(json.dumps({"ops": [block]}))
    assert from_list == from_object
    assert from_list[0].apply == [{"op": "delete_object"}]
    assert from_list[0].select == {"ids": [1]}
    assert parse_ops("[]") == []


def test_parse_reports_json_position():
    """Malformed JSON names its line."""
    with pytest.raises(ParseError) as info:
        parse_ops('{"ops": [\n  {"apply": }\n]}')
    assert info.value.line == 2


@pytest.mark.parametrize("tree, field", [
    ({"ops": [{"apply": {"op": "explode"}}]}, "ops[0].apply[0].op"),
    ({"ops": [{"select": {}}]}, "ops[0].apply"),
    ({"ops": [{"apply": {"op": "recolor"}, "when": 1}]}, "ops[0]"),
    ({"ops": [{"apply": [{"args": {}}]}]}, "ops[0].apply[0]"),
    ({"ops": [{"apply": {"op": "recolor", "args": [1]}}]}, "ops[0].apply[0].args"),
    ({"ops": [{"select": [1], "apply": {"op": "recolor"}}]}, "ops[0].select"),
    ({"ops": {"apply": {}}}, "ops"),
    ({"ops": [], "version": 2}, "$"),
    ({"ops": [3]}, "ops[0]"),
])
def test_parse_reports_field(tree, field):
    """Malformed blocks name the offending field."""
    with pytest.raises(ParseError) as info:
        parse_ops(json.dumps(tree))
    assert info.value.field == field


def test_read_ops(tmp_path):
    """Ops files are read from disk; missing ones are IO errors."""
    path = tmp_path / "ops.json"
    path.write_text(json.dumps([{"apply": {"op": "slow_in_out"}}]))
    assert read_ops(path)[0].apply == [{"op": "slow_in_out"}]
    with pytest.raises(FrameIOError):
        read_ops(tmp_path / "missing.json")


def test_selectors(walker):
    """Each selector kind picks the expected objects."""
    assert select_objects(walker, {}) == [1, 2]
    assert select_objects(walker, {"range": [0, 3]}) == [1, 2]
    assert select_objects(walker, {"ids": [2, 2]}) == [2]
    assert select_objects(walker, {"prop": "all", "range": [0, 1]}) == [1, 2]
    assert select_objects(walker, {"prop": "color", "near": list(RED), "tol": 0.2}) == [1]
    assert select_objects(walker, {"prop": "color", "near": [0, 1, 0]}) == []
    assert select_objects(walker, {"event": "held"}) == [2]


def test_selector_errors(walker):
    """Malformed selectors are parse errors; missing ids are unknown objects."""
    with pytest.raises(ParseError, match="near"):
        select_objects(walker, {"prop": "color"})
    with pytest.raises(ParseError, match="event kind"):
        select_objects(walker, {"event": "explosion"})
    with pytest.raises(ParseError, match="Unsupported"):
        select_objects(walker, {"shape": "round"})
    with pytest.raises(ParseError, match="range"):
        select_objects(walker, {"range": [1, 2, 3]})
    with pytest.raises(UnknownObjectError):
        select_objects(walker, {"ids": [7]})


def test_apply_recolor_and_translate(walker):
    """Blocks run in order against their own selections."""
    blocks = _ops({"select": {"prop": "color", "near": list(RED), "tol": 0.2},
                   "apply": {"op": "recolor", "args": {"rgb": list(BLUE)}}},
                  {"select": {"ids": [1, 2]},
                   "apply": {"op": "adj_global_motion", "args": {"xform": {"tx": 50}}}})
    assert apply_ops(walker, blocks) == 3
    assert np.allclose(walker.get(1).canonical[..., :3], BLUE)
    assert walker.get(1).keyframes[4].params.tx == 54.0
    assert walker.get(2).keyframes[4].params.tx == 38.0


def test_apply_delete_then_render(walker):
    """A deleted object is gone from the rendered frames."""
    assert apply_ops(walker, _ops({"select": {"ids": [1]},
                                   "apply": {"op": "delete_object"}})) == 1
    assert walker.object_ids() == [2]
    assert np.allclose(render_frame(walker, 2)[14, 21], 1.0, atol=1e-5)


def test_apply_argument_conversion(walker):
    """Ranges, eases and per-frame params are converted from JSON."""
    blocks = _ops({"select": {"ids": [1]},
                   "apply": [{"op": "retime", "args": {"src_range": [0, 9],
                                                       "tgt_range": [0, 9],
                                                       "ease": "step:2"}},
                             {"op": "set_transforms",
                              "args": {"params": {"0": {"ty": 3.0}}}}]})
    assert apply_ops(walker, blocks) == 2
    obj = walker.get(1)
    assert obj.keyframes[3].params.tx == pytest.approx(2.0)
    assert obj.keyframes[0].params.ty == 3.0


def test_apply_create_object_with_image(tmp_path, walker):
    """Program operators run once per block with images read beside the file."""
    write_png(tmp_path / "dot.png", solid(RED, size=3))
    blocks = _ops({"select": {"ids": [1]},
                   "apply": {"op": "create_object",
                             "args": {"image": "dot.png", "range": [0, 2]}}})
    assert apply_ops(walker, blocks, base_dir=tmp_path) == 1
    obj = walker.get(3)
    assert obj.frames == [0, 1, 2]
    assert obj.canonical.shape == (3, 3, 4)


def test_apply_skips_deleted_objects(walker):
    """Later calls of a block skip objects an earlier call removed."""
    blocks = _ops({"select": {"ids": [1]},
                   "apply": [{"op": "delete_object"}, {"op": "slow_in_out"}]})
    assert apply_ops(walker, blocks) == 1


@pytest.mark.parametrize("call, field", [
    ({"op": "stretch_time", "args": {"speed": 2}}, "ops[0].apply[0].args"),
    ({"op": "adj_local_motion", "args": {"xform": {"spin": 1}}},
     "ops[0].apply[0].args.xform"),
    ({"op": "retime", "args": {"ease": "wiggle"}}, "ops[0].apply[0].args.ease"),
])
def test_apply_bad_arguments(walker, call, field):
    """Bad operator arguments are parse errors naming the argument."""
    with pytest.raises(ParseError) as info:
        apply_ops(walker, _ops({"select": {"ids": [1]}, "apply": call}))
    assert info.value.field == field
