"""Exception hierarchy for motionvec.

Every error raised deliberately by the package derives from MotionVecError
and also from the closest builtin exception, so callers may catch either
the package-specific class or the generic builtin.
"""

__all__ = [
    "MotionVecError",
    "ConfigError",
    "EmptyMaskError",
    "BinMismatchError",
    "TooManyLevelsError",
    "DimensionMismatchError",
    "DegenerateGeometryError",
    "SingularTransformError",
    "UnknownElementError",
    "UnknownObjectError",
    "IdCollisionError",
    "RangeError",
    "NonMonotoneEaseError",
    "EmptyImageError",
    "InconsistentSelectionError",
    "ParseError",
    "VersionMismatchError",
    "ScriptError",
    "LogMismatchError",
    "FrameOutOfRangeError",
    "ConcurrentMutationError",
    "FrameIOError",
]


class MotionVecError(Exception):
    """Base class for all motionvec errors."""


class ConfigError(MotionVecError, ValueError):
    """Invalid configuration value, section, or key."""


class EmptyMaskError(MotionVecError, ValueError):
    """A mask (or image alpha support) has zero area where content is required."""


class BinMismatchError(MotionVecError, ValueError):
    """Two histograms have different bin counts."""


class TooManyLevelsError(MotionVecError, ValueError):
    """A pyramid would shrink an image below the minimum level size."""


class DimensionMismatchError(MotionVecError, ValueError):
    """Images, masks, or flow fields that must share dimensions do not."""


class DegenerateGeometryError(MotionVecError, ValueError):
    """Point correspondences are collinear and cannot define an affine map."""


class SingularTransformError(MotionVecError, ValueError):
    """An affine transform is not invertible (or not orientation preserving)."""


class UnknownElementError(MotionVecError, KeyError):
    """A placement element id is not present in a placement set."""


class UnknownObjectError(MotionVecError, KeyError):
    """An object id is not present in a motion program."""


class IdCollisionError(MotionVecError, ValueError):
    """An object id is already taken."""


class RangeError(MotionVecError, ValueError):
    """A frame range is empty, reversed, or outside the program."""


class NonMonotoneEaseError(MotionVecError, ValueError):
    """An easing function is not monotone or misses its endpoints."""


class EmptyImageError(MotionVecError, ValueError):
    """A replacement canonical image has no opaque pixels."""


class InconsistentSelectionError(MotionVecError, ValueError):
    """Accepted mappings share an object or a region."""


class ParseError(MotionVecError, ValueError):
    """A sidecar, ops file, or label file cannot be parsed.

    Args:
        message: Human-readable description of the problem.
        line: 1-based line number, when known.
        column: 1-based column number, when known.
        field: Dotted path of the offending field, when known.
    """

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, field: str | None = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if field is not None:
            location.append(f"field '{field}'")
        full = f"{message} ({', '.join(location)})" if location else message
        super().__init__(full)
        self.line = line
        self.column = column
        self.field = field


class VersionMismatchError(ParseError):
    """A sidecar declares a format string this version cannot read."""


class ScriptError(MotionVecError, ValueError):
    """A synthetic scene script is invalid."""


class LogMismatchError(MotionVecError, ValueError):
    """Predicted and ground-truth mapping logs cover different frames."""


class FrameOutOfRangeError(MotionVecError, IndexError):
    """A frame index lies outside [0, num_frames)."""


class ConcurrentMutationError(MotionVecError, RuntimeError):
    """A motion program was mutated from a thread other than its owner."""


class FrameIOError(MotionVecError, OSError):
    """Frames cannot be read from or written to disk."""
