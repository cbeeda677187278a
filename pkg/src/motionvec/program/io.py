"""Program files: display SVG plus the authoritative JSON sidecar.

The sidecar is ``{"format": "motionvec-program/1", "program": ...}`` where
the program is either the JSON processor's marker tree (as written by
write_program) or a plain hand-written object whose omitted fields take
their defaults.
"""
import json
import logging
from pathlib import Path
from typing import Any, Final

from ..configuration.json_processor import from_json_tree, to_json_tree
from ..exceptions import FrameIOError, ParseError, VersionMismatchError
from .model import MotionProgram
from .svg import write_svg

__all__ = ["SIDECAR_FORMAT", "sidecar_path", "write_program", "parse_program",
           "program_to_json", "program_from_json"]

logger = logging.getLogger(__name__)

SIDECAR_FORMAT: Final[str] = "motionvec-program/1"


def sidecar_path(path: str | Path) -> Path:
    """The ``.json`` sidecar next to a program path (SVG or sidecar)."""
    return Path(path).with_suffix(".json")


def program_to_json(program: MotionProgram) -> str:
    """Byte-stable sidecar text of a program."""
    envelope = {"format": SIDECAR_FORMAT, "program": to_json_tree(program)}
    return json.dumps(envelope, sort_keys=True, indent=1) + "\n"


def program_from_json(text: str) -> MotionProgram:
    """Parse sidecar text.

    Raises:
        ParseError: On malformed JSON (with line/column) or invalid fields
            (with the field path).
        VersionMismatchError: If the format string is not supported.
    """
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid sidecar JSON: {e.msg}", line=e.lineno,
                         column=e.colno) from e
    if not isinstance(tree, dict):
        raise ParseError("Sidecar root must be an object", field="$")
    if "format" not in tree:
        raise ParseError("Sidecar has no format string", field="format")
    if tree["format"] != SIDECAR_FORMAT:
        raise VersionMismatchError(f"Unsupported program format {tree['format']!r}, "
                                   f"expected {SIDECAR_FORMAT!r}", field="format")
    if "program" not in tree:
        raise ParseError("Sidecar has no program", field="program")
    program: Any = from_json_tree(tree["program"], path="program")
    if isinstance(program, dict):
        try:
            program = MotionProgram(**program)
        except (TypeError, ValueError, KeyError) as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"Invalid program: {e}", field="program") from e
    if not isinstance(program, MotionProgram):
        raise ParseError(f"Expected a program, got {type(program).__name__}",
                         field="program")
    try:
        program.validate()
    except ValueError as e:
        raise ParseError(f"Invalid program: {e}", field="program") from e
    return program


def write_program(program: MotionProgram, path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>.svg`` and its sidecar ``<path>.json``.

    Returns:
        (svg path, sidecar path).

    Raises:
        ValueError: If the program is invalid.
        FrameIOError: If a file cannot be written.
    """
    program.validate()
    svg = Path(path).with_suffix(".svg")
    sidecar = sidecar_path(path)
    write_svg(program, svg)
    try:
        sidecar.write_text(program_to_json(program), encoding="utf-8")
    except OSError as e:
        raise FrameIOError(f"Cannot write program sidecar {sidecar}: {e}") from e
    logger.info("Wrote program with %d objects, %d frames to %s", len(program.objects),
                program.num_frames, svg)
    return svg, sidecar


def parse_program(path: str | Path) -> MotionProgram:
    """Read a program from its sidecar (given the SVG or the sidecar path).

    Raises:
        FrameIOError: If the sidecar cannot be read.
        ParseError: If it is malformed.
        VersionMismatchError: If its format string is not supported.
    """
    sidecar = sidecar_path(path)
    try:
        text = sidecar.read_text(encoding="utf-8")
    except OSError as e:
        raise FrameIOError(f"Cannot read program sidecar {sidecar}: {e}") from e
    return program_from_json(text)
