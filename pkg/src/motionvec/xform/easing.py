"""Easing functions: monotone time warps of [0, 1] onto itself."""
import functools
from collections.abc import Callable
from typing import Final, TypeAlias

import numpy as np

from ..exceptions import NonMonotoneEaseError

__all__ = [
    "EaseFn",
    "linear",
    "ease_in_cubic",
    "ease_out_cubic",
    "ease_in_out_cubic",
    "step",
    "hold_of",
    "overshoot",
    "check_ease",
    "ease_by_name",
    "EASINGS",
]

EaseFn: TypeAlias = Callable[[float], float]

_CHECK_SAMPLES: Final[int] = 257
_CHECK_TOL: Final[float] = 1e-9


def ease_out(func: EaseFn) -> EaseFn:
    @functools.wraps(func)
    def eased(u: float) -> float:
        return 1.0 - func(1.0 - u)
    return eased


def ease_in_out(func: EaseFn) -> EaseFn:
    @functools.wraps(func)
    def eased(u: float) -> float:
        if u < 0.5:
            return func(2.0 * u) / 2.0
        return 1.0 - func(2.0 - 2.0 * u) / 2.0
    return eased


def linear(u: float) -> float:
    return float(u)


def ease_in_cubic(u: float) -> float:
    return float(u) ** 3


ease_out_cubic = ease_out(ease_in_cubic)
ease_out_cubic.__name__ = "ease_out_cubic"
ease_in_out_cubic = ease_in_out(ease_in_cubic)
ease_in_out_cubic.__name__ = "ease_in_out_cubic"


def step(n: int, base: EaseFn = linear) -> EaseFn:
    """Animate "on n's": retime holds every sampled pose for n frames.

    The returned function evaluates like base; the hold count travels as
    its ``hold`` attribute, since holding is defined on the frame grid.

    Raises:
        ValueError: If n < 1.
    """
    if int(n) < 1:
        raise ValueError(f"step needs n >= 1, got {n}")

    @functools.wraps(base)
    def stepped(u: float) -> float:
        return base(u)
    stepped.__name__ = f"step_{int(n)}"
    stepped.hold = int(n)
    return stepped


def hold_of(ease: EaseFn) -> int:
    """Frames each pose is held for under an ease (1 unless built by step)."""
    return int(getattr(ease, "hold", 1))


def overshoot(amount: float = 1.70158) -> Callable[[float], float]:
    """Curve that runs past 1 and settles back; not an ease (not monotone)."""
    def curve(u: float) -> float:
        v = float(u) - 1.0
        return v * v * ((amount + 1.0) * v + amount) + 1.0
    return curve


def check_ease(ease: EaseFn) -> None:
    """Verify ease(0) = 0, ease(1) = 1 and monotonicity on a sample grid.

    Raises:
        NonMonotoneEaseError: If any check fails.
    """
    grid = np.linspace(0.0, 1.0, _CHECK_SAMPLES)
    values = np.array([ease(float(u)) for u in grid])
    if abs(values[0]) > _CHECK_TOL or abs(values[-1] - 1.0) > _CHECK_TOL:
        raise NonMonotoneEaseError(
            f"Ease must map 0 to 0 and 1 to 1, got {values[0]:.4g} and {values[-1]:.4g}")
    if np.any(np.diff(values) < -_CHECK_TOL):
        raise NonMonotoneEaseError("Ease is not monotone non-decreasing")


EASINGS: Final[dict[str, EaseFn]] = {
    "linear": linear,
    "ease_in_cubic": ease_in_cubic,
    "ease_out_cubic": ease_out_cubic,
    "ease_in_out_cubic": ease_in_out_cubic,
}


def ease_by_name(name: str) -> EaseFn:
    """Look up an ease; ``step:N`` builds step(N).

    Raises:
        KeyError: If the name is unknown.
    """
    if name.startswith("step:"):
        return step(int(name.partition(":")[2]))
    if name not in EASINGS:
        raise KeyError(f"Unknown ease '{name}'; expected one of "
                       f"{sorted(EASINGS) + ['step:N']}")
    return EASINGS[name]
