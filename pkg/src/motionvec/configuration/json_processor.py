"""JSON-compatible serialization for configs, programs and ops files.

This module converts rich Python data structures into a pure-JSON
representation and back. It handles primitives, lists, tuples, dicts with
string keys, Enums, numpy arrays, and any object exposing ``get_params()``
(rebuilt through its constructor).

Special types are encoded with internal marker keys. Numpy arrays are
stored losslessly as zlib-compressed base64 of their raw little-endian
bytes plus dtype and shape, so floats survive a round trip bit for bit.
Output keys are sorted, which makes ``dumpjs`` byte-stable.
"""

import base64
import importlib
import json
import zlib
from enum import Enum
from typing import Any, Final, Mapping, NewType

import numpy as np

from ..exceptions import ParseError

__all__ = ["JsonSerializedObject", "dumpjs", "loadjs",
           "to_json_tree", "from_json_tree"]

JsonSerializedObject = NewType("JsonSerializedObject", str)

_ALLOWED_DTYPES: Final[frozenset[str]] = frozenset(
    {"<f8", "<f4", "|b1", "<i8", "<i4", "|u1", "<u2"})


class _Markers:
    """Internal keys used to tag non-JSON-native constructs.

    Attributes:
        DICT: Marker for dictionaries.
        TUPLE: Marker for tuple values.
        NDARRAY: Marker for numpy arrays.
        ENUM: Marker for Enum members.
        CLASS: Object class name.
        MODULE: Module name defining the class.
        PARAMS: Constructor parameters for get_params-based reconstruction.
    """

    DICT = "..dict.."
    TUPLE = "..tuple.."
    NDARRAY = "..ndarray.."
    CLASS = "..class.."
    MODULE = "..module.."
    PARAMS = "..params.."
    ENUM = "..enum.."


def _encode_array(a: np.ndarray) -> dict[str, Any]:
    """Encode a numpy array as a marker-bearing mapping."""
    arr = np.ascontiguousarray(a)
    if arr.dtype.byteorder == ">":
        arr = arr.astype(arr.dtype.newbyteorder("<"))
    dtype = arr.dtype.str
    if dtype not in _ALLOWED_DTYPES:
        raise TypeError(f"Unsupported array dtype: {dtype}")
    payload = base64.b64encode(zlib.compress(arr.tobytes(), 6)).decode("ascii")
    return {_Markers.NDARRAY: {"data": payload, "dtype": dtype,
                               "shape": list(arr.shape)}}


def _decode_array(block: Any, path: str) -> np.ndarray:
    """Decode the payload of an NDARRAY marker."""
    if not isinstance(block, dict) or set(block) != {"data", "dtype", "shape"}:
        raise ParseError("Array block must hold exactly data, dtype and shape",
                         field=path)
    dtype = block["dtype"]
    if dtype not in _ALLOWED_DTYPES:
        raise ParseError(f"Unsupported array dtype {dtype!r}", field=path)
    shape = block["shape"]
    if not isinstance(shape, list) or not all(
            isinstance(s, int) and s >= 0 for s in shape):
        raise ParseError("Array shape must be a list of non-negative ints",
                         field=path)
    try:
        raw = zlib.decompress(base64.b64decode(block["data"], validate=True))
    except (ValueError, zlib.error) as e:
        raise ParseError(f"Corrupt array payload: {e}", field=path) from e
    arr = np.frombuffer(raw, dtype=np.dtype(dtype))
    if arr.size != int(np.prod(shape, dtype=np.int64)):
        raise ParseError(f"Array payload has {arr.size} items, "
                         f"shape {shape} needs {int(np.prod(shape))}", field=path)
    return arr.reshape(shape).copy()


def to_json_tree(x: Any, *, seen: set[int] | None = None) -> Any:
    """Convert a Python object into a JSON-serializable structure.

    Args:
        x: The object to convert.
        seen: Visited object IDs for cycle detection.

    Returns:
        A JSON-compatible structure with marker keys for non-native types.

    Raises:
        TypeError: If x contains an unsupported type or a non-str dict key.
        RecursionError: If a cyclic reference is detected.
    """
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (str, type(None))):
        return x
    if isinstance(x, np.ndarray):
        return _encode_array(x)

    if seen is None:
        seen = set()
    obj_id = id(x)
    if obj_id in seen:
        raise RecursionError(
            f"Cyclic reference detected while serializing {type(x).__name__}")
    seen.add(obj_id)

    try:
        if hasattr(x, "get_params") and not isinstance(x, type):
            result = {_Markers.CLASS: type(x).__qualname__,
                      _Markers.MODULE: type(x).__module__,
                      _Markers.PARAMS: to_json_tree(x.get_params(), seen=seen)}
        elif isinstance(x, list):
            result = [to_json_tree(i, seen=seen) for i in x]
        elif isinstance(x, tuple):
            result = {_Markers.TUPLE: [to_json_tree(i, seen=seen) for i in x]}
        elif isinstance(x, dict):
            for k in x:
                if not isinstance(k, str):
                    raise TypeError(
                        f"Dict keys must be str, got {type(k).__name__}")
            result = {_Markers.DICT: {k: to_json_tree(v, seen=seen)
                                      for k, v in x.items()}}
        elif isinstance(x, Enum):
            result = {_Markers.ENUM: x.name,
                      _Markers.CLASS: type(x).__qualname__,
                      _Markers.MODULE: type(x).__module__}
        else:
            raise TypeError(f"Unsupported type: {type(x).__name__}")
    finally:
        seen.remove(obj_id)
    return result


def _recreate_object(x: Mapping[str, Any], path: str) -> Any:
    """Recreate an object instance from its serialized metadata.

    Raises:
        ParseError: If markers are missing, the class cannot be imported,
            or the constructor rejects the stored parameters.
    """
    if _Markers.MODULE not in x or _Markers.CLASS not in x:
        raise ParseError("Object metadata missing module or class marker",
                         field=path)
    module_name = x[_Markers.MODULE]
    class_name = x[_Markers.CLASS]
    if not str(module_name).startswith("motionvec."):
        raise ParseError(f"Refusing to import {module_name}.{class_name}",
                         field=path)
    try:
        cls = getattr(importlib.import_module(module_name), class_name)
    except (ImportError, AttributeError) as e:
        raise ParseError(f"Could not import {class_name} from {module_name}",
                         field=path) from e

    match x:
        case {_Markers.PARAMS: params_json}:
            params = from_json_tree(params_json, path=f"{path}.params")
            if not isinstance(params, dict):
                raise ParseError("Object params must be a dict", field=path)
            try:
                return cls(**params)
            except (TypeError, ValueError) as e:
                if isinstance(e, ParseError):
                    raise
                raise ParseError(f"Cannot rebuild {class_name}: {e}",
                                 field=path) from e
        case {_Markers.ENUM: member_name}:
            if not (isinstance(cls, type) and issubclass(cls, Enum)):
                raise ParseError(f"Class {class_name} is not an Enum", field=path)
            try:
                return cls[member_name]
            except KeyError as e:
                raise ParseError(f"{class_name} has no member {member_name}",
                                 field=path) from e
        case _:
            raise ParseError("Unable to recreate object from provided data",
                             field=path)


def from_json_tree(x: Any, *, path: str = "$") -> Any:
    """Inverse of to_json_tree.

    Args:
        x: The JSON-loaded Python structure to convert.
        path: Dotted location of x, used in error messages.

    Returns:
        The reconstructed Python object graph.

    Raises:
        ParseError: If a marker block is malformed.
    """
    match x:
        case None | bool() | int() | float() | str():
            return x
        case list():
            return [from_json_tree(v, path=f"{path}[{i}]") for i, v in enumerate(x)]
        case {_Markers.TUPLE: val}:
            if len(x) != 1 or not isinstance(val, list):
                raise ParseError("TUPLE marker must be the only key and map "
                                 "to a list", field=path)
            return tuple(from_json_tree(v, path=f"{path}[{i}]")
                         for i, v in enumerate(val))
        case {_Markers.NDARRAY: val}:
            if len(x) != 1:
                raise ParseError("NDARRAY marker must be the only key", field=path)
            return _decode_array(val, path)
        case {_Markers.DICT: val}:
            if len(x) != 1 or not isinstance(val, dict):
                raise ParseError("DICT marker must be the only key and map "
                                 "to an object", field=path)
            return {k: from_json_tree(v, path=f"{path}.{k}") for k, v in val.items()}
        case {_Markers.MODULE: _, **__} | {_Markers.CLASS: _, **__} as d:
            return _recreate_object(d, path)
        case dict():
            # Plain JSON objects (hand-written config and ops files).
            return {k: from_json_tree(v, path=f"{path}.{k}") for k, v in x.items()}
        case _:
            raise ParseError(f"Unsupported JSON value of type {type(x).__name__}",
                             field=path)


def dumpjs(obj: Any, **kwargs) -> JsonSerializedObject:
    """Dump an object to a JSON string using marker-based serialization.

    Args:
        obj: The object to serialize.
        **kwargs: Additional keyword arguments forwarded to json.dumps.
            Keys are always sorted.

    Returns:
        The JSON string.
    """
    kwargs.setdefault("sort_keys", True)
    return JsonSerializedObject(json.dumps(to_json_tree(obj), **kwargs))


def loadjs(s: str, **kwargs) -> Any:
    """Load an object from a JSON string produced by dumpjs.

    Args:
        s: The JSON string to parse.
        **kwargs: Arguments forwarded to json.loads (no object_hook).

    Returns:
        The reconstructed Python object.

    Raises:
        TypeError: If s is not a string.
        ValueError: If object_hook is provided.
        ParseError: If s is not valid JSON (with line and column) or a
            marker block is malformed.
    """
    if not isinstance(s, str):
        raise TypeError(f"s must be a string, got {type(s).__name__}")
    if "object_hook" in kwargs:
        raise ValueError("object_hook cannot be used with motionvec.loadjs()")
    try:
        tree = json.loads(s, **kwargs)
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid JSON: {e.msg}", line=e.lineno,
                         column=e.colno) from e
    return from_json_tree(tree)
