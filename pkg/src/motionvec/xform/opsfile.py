"""Declarative transformation scripts.

An ops file is JSON: either a list of blocks or ``{"ops": [...]}``. Each
block selects objects, then applies one or more operators to every selected
object, in order::

    {"ops": [
      {"select": {"prop": "color", "near": [1, 0, 0], "tol": 0.2},
       "apply": {"op": "recolor", "args": {"rgb": [0, 0, 1]}}},
      {"select": {"event": "collision"},
       "apply": [{"op": "slow_in_out"}, {"op": "motion_texture",
                                         "args": {"kind": "wobble"}}]}
    ]}

Selectors: ``{"ids": [...]}``, ``{"prop": "all"}``, ``{"prop": "color",
"near": [r, g, b], "tol": d}`` and ``{"event": kind}``, each optionally
limited by ``"range": [first, last]``; an absent selector selects every
object. Image arguments are paths relative to the ops file.
"""
import inspect
import json
import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Final

import numpy as np

from ..configuration.module_configs import EventConfig
from ..diffcomp.affine import AffineParams
from ..exceptions import FrameIOError, ParseError
from ..imaging.raster import read_png
from ..program.model import MotionProgram
from .easing import ease_by_name
from .effects import (anticipation_follow_through, motion_texture, recolor, retime_to_beats,
                      slow_in_out, stretch_time)
from .operators import (adj_global_motion, adj_local_motion, change_appearance,
                        collision_preserving_change, copy_motion, create_object,
                        delete_object, retime, set_transforms)
from .queries import EVENT_KINDS, dominant_color, event_query, prop_query

__all__ = ["OpsBlock", "OBJECT_OPERATORS", "PROGRAM_OPERATORS", "parse_ops", "read_ops",
           "select_objects", "apply_ops"]

logger = logging.getLogger(__name__)

_DEFAULT_COLOR_TOL: Final[float] = 0.1


def _copy_motion_from(program: MotionProgram, object_id: int, source: int) -> None:
    copy_motion(program, int(source), object_id)


OBJECT_OPERATORS: Final[dict[str, Callable[..., Any]]] = {
    "retime": retime,
    "stretch_time": stretch_time,
    "slow_in_out": slow_in_out,
    "retime_to_beats": retime_to_beats,
    "adj_local_motion": adj_local_motion,
    "adj_global_motion": adj_global_motion,
    "change_appearance": change_appearance,
    "collision_preserving_change": collision_preserving_change,
    "delete_object": delete_object,
    "copy_motion": _copy_motion_from,
    "set_transforms": set_transforms,
    "anticipation_follow_through": anticipation_follow_through,
    "motion_texture": motion_texture,
    "recolor": recolor,
}

PROGRAM_OPERATORS: Final[dict[str, Callable[..., Any]]] = {
    "create_object": create_object,
}


@dataclass
class OpsBlock:
    """One select/apply block of an ops file.

    Attributes:
        index: Position in the file, used in error field paths.
        select: Selector mapping (empty selects everything).
        apply: Operator calls, each ``{"op": name, "args": {...}}``.
    """
    index: int
    select: dict[str, Any] = field(default_factory=dict)
    apply: list[dict[str, Any]] = field(default_factory=list)


def _check_block(index: int, raw: Any) -> OpsBlock:
    where = f"ops[{index}]"
    if not isinstance(raw, Mapping):
        raise ParseError("An ops block must be an object", field=where)
    unknown = set(raw) - {"select", "apply"}
    if unknown:
        raise ParseError(f"Unknown block keys {sorted(unknown)}", field=where)
    select = raw.get("select") or {}
    if not isinstance(select, Mapping):
        raise ParseError("select must be an object", field=f"{where}.select")
    calls = raw.get("apply")
    if calls is None:
        raise ParseError("Block has nothing to apply", field=f"{where}.apply")
    calls = [calls] if isinstance(calls, Mapping) else calls
    if not isinstance(calls, list):
        raise ParseError("apply must be an object or a list", field=f"{where}.apply")
    for j, call in enumerate(calls):
        at = f"{where}.apply[{j}]"
        if not isinstance(call, Mapping) or "op" not in call:
            raise ParseError("An operator call needs an 'op'", field=at)
        if call["op"] not in OBJECT_OPERATORS and call["op"] not in PROGRAM_OPERATORS:
            raise ParseError(f"Unknown operator '{call['op']}'", field=f"{at}.op")
        if not isinstance(call.get("args", {}), Mapping):
            raise ParseError("args must be an object", field=f"{at}.args")
    return OpsBlock(index, dict(select), [dict(c) for c in calls])


def parse_ops(text: str) -> list[OpsBlock]:
    """Parse ops file text into blocks.

    Raises:
        ParseError: On malformed JSON (with line/column) or a malformed
            block (with its ``ops[i]`` field path).
    """
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid ops JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    if isinstance(tree, Mapping):
        if set(tree) - {"ops"}:
            raise ParseError(f"Unknown top-level keys {sorted(set(tree) - {'ops'})}",
                             field="$")
        tree = tree.get("ops", [])
    if not isinstance(tree, list):
        raise ParseError("Ops must be a list of blocks", field="ops")
    return [_check_block(i, raw) for i, raw in enumerate(tree)]


def read_ops(path: str | Path) -> list[OpsBlock]:
    """Read and parse an ops file.

    Raises:
        FrameIOError: If the file cannot be read.
        ParseError: If it is malformed.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FrameIOError(f"Cannot read ops file {path}: {e}") from e
    return parse_ops(text)


def _frame_range(value: Any, where: str) -> tuple[int, int] | None:
    if value is None:
        return None
    if not isinstance(value, Sequence) or len(value) != 2:
        raise ParseError("A range is [first, last]", field=where)
    return int(value[0]), int(value[1])


def select_objects(program: MotionProgram, selector: Mapping[str, Any],
                   cfg: EventConfig | None = None, where: str = "select") -> list[int]:
    """Ids of the objects a selector picks, ascending.

    Raises:
        ParseError: If the selector is malformed.
        UnknownObjectError: If an explicitly listed id does not exist.
        RangeError: If a selector range leaves the program.
    """
    cfg = cfg or EventConfig()
    frame_range = _frame_range(selector.get("range"), f"{where}.range")
    if not selector or set(selector) == {"range"}:
        picked = program.object_ids()
    elif "ids" in selector:
        picked = [program.get(int(i)).object_id for i in selector["ids"]]
    elif "event" in selector:
        kind = selector["event"]
        if kind not in EVENT_KINDS:
            raise ParseError(f"Unknown event kind '{kind}'", field=f"{where}.event")
        picked = [i for i in program.object_ids()
                  if event_query(program, i, kind, frame_range, cfg)]
    elif selector.get("prop") == "all":
        series = prop_query(program, None, "all", frame_range)
        picked = sorted({i for ids in series.values for i in ids})
    elif selector.get("prop") == "color":
        if "near" not in selector:
            raise ParseError("A color selector needs 'near'", field=f"{where}.near")
        near = np.asarray(selector["near"], dtype=np.float64)
        tol = float(selector.get("tol", _DEFAULT_COLOR_TOL))
        picked = []
        for obj in program.objects:
            color = dominant_color(obj.canonical, cfg.color_clusters)[0]
            if float(np.linalg.norm(color - near)) <= tol:
                picked.append(obj.object_id)
    else:
        raise ParseError(f"Unsupported selector {dict(selector)}", field=where)
    return sorted(set(picked))


def _convert(op: str, key: str, value: Any, base_dir: Path) -> tuple[str, Any]:
    if key == "image":
        return key, read_png(base_dir / value, keep_alpha=True)
    if key == "ease":
        return key, ease_by_name(value)
    if key == "xform":
        return key, AffineParams(**value)
    if key == "params":
        if op == "set_transforms":
            return key, {int(f): AffineParams(**p) for f, p in value.items()}
        return key, AffineParams(**value)
    if key == "range":
        first, last = int(value[0]), int(value[1])
        if op == "create_object":
            return "frames", list(range(first, last + 1))
        return "frame_range", (first, last)
    if key.endswith("_range"):
        return key, (int(value[0]), int(value[1]))
    return key, value


def _bind(fn: Callable[..., Any], head: Sequence[Any], call: Mapping[str, Any],
          base_dir: Path, where: str) -> inspect.BoundArguments:
    kwargs = {}
    for key, value in call.get("args", {}).items():
        try:
            name, converted = _convert(call["op"], key, value, base_dir)
        except (TypeError, ValueError, KeyError, IndexError) as e:
            raise ParseError(f"Bad argument '{key}': {e}", field=f"{where}.args.{key}") from e
        kwargs[name] = converted
    try:
        return inspect.signature(fn).bind(*head, **kwargs)
    except TypeError as e:
        raise ParseError(f"Bad arguments for '{call['op']}': {e}", field=f"{where}.args") from e


def apply_ops(program: MotionProgram, blocks: Sequence[OpsBlock],
              cfg: EventConfig | None = None, base_dir: str | Path = ".") -> int:
    """Run ops blocks against a program in order.

    Selection happens once per block, before its operators run. Program
    operators (create_object) run once per block whatever the selection.

    Returns:
        Number of operator applications.

    Raises:
        ParseError: On a malformed selector or operator arguments.
        Any error the operators raise.
    """
    base_dir = Path(base_dir)
    applied = 0
    for block in blocks:
        where = f"ops[{block.index}]"
        selected = select_objects(program, block.select, cfg, f"{where}.select")
        logger.info("Block %d: %d objects selected", block.index, len(selected))
        for j, call in enumerate(block.apply):
            at = f"{where}.apply[{j}]"
            op = call["op"]
            if op in PROGRAM_OPERATORS:
                fn = PROGRAM_OPERATORS[op]
                bound = _bind(fn, [program], call, base_dir, at)
                fn(*bound.args, **bound.kwargs)
                applied += 1
                continue
            fn = OBJECT_OPERATORS[op]
            for object_id in selected:
                if object_id not in program.object_ids():
                    logger.debug("Block %d: object %d is gone, skipping %s",
                                 block.index, object_id, op)
                    continue
                bound = _bind(fn, [program, object_id], call, base_dir, at)
                fn(*bound.args, **bound.kwargs)
                applied += 1
    return applied
