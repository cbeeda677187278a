"""Seven-parameter affine transforms.

An AffineParams places a source image on a canvas. The linear part is

    L = R(theta) . ShearX(kx) . ShearY(ky) . S(sx, sy)

and the full 3x3 matrix, for a source anchor a and a canvas anchor c, is

    M = T(c + (tx, ty)) . L . T(-a)

so identity params put the source anchor on the canvas anchor. By default
the source anchor is the source center ((w-1)/2, (h-1)/2) and the canvas
anchor is the canvas center ((W-1)/2, (H-1)/2). Points are (x, y).
"""
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Final

import numpy as np
from numpy.typing import NDArray

from ..exceptions import SingularTransformError

__all__ = [
    "AffineParams",
    "PARAM_NAMES",
    "image_center",
    "translation_matrix",
    "apply_matrix_to_points",
    "MIN_DETERMINANT",
]

PARAM_NAMES: Final[tuple[str, ...]] = ("tx", "ty", "theta", "sx", "sy", "kx", "ky")
MIN_DETERMINANT: Final[float] = 1e-9


def image_center(shape: Sequence[int]) -> NDArray[np.float64]:
    """Anchor ((w-1)/2, (h-1)/2) of an array with shape (h, w, ...)."""
    return np.array([(shape[1] - 1) / 2.0, (shape[0] - 1) / 2.0])


def translation_matrix(dx: float, dy: float) -> NDArray[np.float64]:
    return np.array([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]])


def apply_matrix_to_points(m: np.ndarray, pts: np.ndarray) -> NDArray[np.float64]:
    """Map (N, 2) points through a 3x3 affine matrix."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    return pts @ m[:2, :2].T + m[:2, 2]


def _wrap_angle(theta: float) -> float:
    return math.atan2(math.sin(theta), math.cos(theta))


@dataclass(frozen=True)
class AffineParams:
    """Translation, rotation (radians), scale and shear of a placement.

    Raises:
        ValueError: If any field is not finite.
        SingularTransformError: If sx or sy is not positive.
    """
    tx: float = 0.0
    ty: float = 0.0
    theta: float = 0.0
    sx: float = 1.0
    sy: float = 1.0
    kx: float = 0.0
    ky: float = 0.0

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"AffineParams.{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.sx <= 0 or self.sy <= 0:
            raise SingularTransformError(
                f"Scale factors must be positive, got sx={self.sx}, sy={self.sy}")

    def get_params(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @classmethod
    def identity(cls) -> "AffineParams":
        return cls()

    @classmethod
    def translation(cls, tx: float, ty: float) -> "AffineParams":
        return cls(tx=tx, ty=ty)

    def as_vector(self) -> NDArray[np.float64]:
        return np.array([getattr(self, name) for name in PARAM_NAMES])

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "AffineParams":
        if len(v) != len(PARAM_NAMES):
            raise ValueError(f"Expected {len(PARAM_NAMES)} values, got {len(v)}")
        return cls(**{name: float(x) for name, x in zip(PARAM_NAMES, v)})

    def is_identity(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.as_vector() - AffineParams().as_vector()) <= tol))

    def linear(self) -> NDArray[np.float64]:
        """The 2x2 linear part R . ShearX . ShearY . S."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        rot = np.array([[c, -s], [s, c]])
        shear_x = np.array([[1.0, self.kx], [0.0, 1.0]])
        shear_y = np.array([[1.0, 0.0], [self.ky, 1.0]])
        scale = np.diag([self.sx, self.sy])
        return rot @ shear_x @ shear_y @ scale

    def matrix(self, src_anchor: Sequence[float] = (0.0, 0.0),
               dst_anchor: Sequence[float] = (0.0, 0.0)) -> NDArray[np.float64]:
        """3x3 matrix mapping source points to canvas points."""
        m = np.eye(3)
        lin = self.linear()
        m[:2, :2] = lin
        src = np.asarray(src_anchor, dtype=np.float64)
        dst = np.asarray(dst_anchor, dtype=np.float64)
        m[:2, 2] = dst + np.array([self.tx, self.ty]) - lin @ src
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray, src_anchor: Sequence[float] = (0.0, 0.0),
                    dst_anchor: Sequence[float] = (0.0, 0.0)) -> "AffineParams":
        """Decompose a 3x3 (or 2x3) affine matrix with ky = 0.

        Raises:
            SingularTransformError: If the linear part is singular or
                mirrors (non-positive determinant).
        """
        m = np.asarray(m, dtype=np.float64)
        lin = m[:2, :2]
        det = float(np.linalg.det(lin))
        if not det > MIN_DETERMINANT:
            raise SingularTransformError(
                f"Cannot decompose a transform with determinant {det:.3g}")
        theta = math.atan2(lin[1, 0], lin[0, 0])
        sx = math.hypot(lin[0, 0], lin[1, 0])
        c, s = math.cos(theta), math.sin(theta)
        upper = np.array([[c, s], [-s, c]]) @ lin
        sy = float(upper[1, 1])
        kx = float(upper[0, 1]) / sy
        src = np.asarray(src_anchor, dtype=np.float64)
        dst = np.asarray(dst_anchor, dtype=np.float64)
        t = m[:2, 2] + lin @ src - dst
        return cls(tx=float(t[0]), ty=float(t[1]), theta=theta, sx=sx, sy=sy, kx=kx)

    def determinant(self) -> float:
        return self.sx * self.sy

    def lerp(self, other: "AffineParams", u: float) -> "AffineParams":
        """Componentwise interpolation; theta follows the shortest arc."""
        a = self.as_vector()
        b = other.as_vector()
        b[2] = a[2] + _wrap_angle(b[2] - a[2])
        return AffineParams.from_vector(a + (b - a) * float(u))

    def replace(self, **changes: float) -> "AffineParams":
        values = self.get_params()
        for name, value in changes.items():
            if name not in values:
                raise KeyError(f"Unknown affine parameter '{name}'")
            values[name] = value
        return AffineParams(**values)

    def compose(self, other: "AffineParams",
                anchor: Sequence[float] = (0.0, 0.0)) -> "AffineParams":
        """Params of applying other first, then self, both about anchor."""
        m = self.matrix(anchor, anchor) @ other.matrix(anchor, anchor)
        return AffineParams.from_matrix(m, anchor, anchor)

    def inverse(self, anchor: Sequence[float] = (0.0, 0.0)) -> "AffineParams":
        m = np.linalg.inv(self.matrix(anchor, anchor))
        return AffineParams.from_matrix(m, anchor, anchor)
