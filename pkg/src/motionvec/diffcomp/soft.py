"""Differentiable soft compositing and the placement optimizer (torch).

Each element's depth z and alpha enter a per-pixel softmax together with a
fixed-depth background:

    color(p) = (sum_i Cp_i(p) w_i(p) + bg(p) w_bg) / (sum_i a_i(p) w_i(p) + w_bg)

with w_i = exp(z_i / tau) and w_bg = exp(z_bg / tau), where Cp is the
premultiplied color and a the alpha of the resampled element. This equals a
softmax over logits z_i / tau + log a_i and tends to hard compositing as
tau goes to 0. Everything runs in float64 on the CPU.
"""
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F
from numpy.typing import NDArray

from ..configuration.module_configs import DcConfig
from ..exceptions import DimensionMismatchError, SingularTransformError
from ..imaging.pyramid import max_pyramid_levels
from ..imaging.raster import RasterImage
from .affine import MIN_DETERMINANT, PARAM_NAMES, AffineParams
from .placement import PlacementSet, SourceElement

__all__ = [
    "composite_soft",
    "dc_loss",
    "dc_loss_with_grad",
    "dc_optimize",
    "DcResult",
]

logger = logging.getLogger(__name__)

_DTYPE = torch.float64
_N_VARS = len(PARAM_NAMES) + 1  # seven affine params and z
_MIN_SCALE = 1e-3


def _t(a: np.ndarray) -> torch.Tensor:
    return torch.as_tensor(np.ascontiguousarray(a), dtype=_DTYPE)


def _padded_premultiplied(image: np.ndarray) -> torch.Tensor:
    """(1, 4, h+2, w+2) premultiplied tensor with a transparent border."""
    premult = np.concatenate([image[..., :3] * image[..., 3:4], image[..., 3:4]], axis=-1)
    padded = np.pad(premult, ((1, 1), (1, 1), (0, 0)))
    return _t(padded).permute(2, 0, 1).unsqueeze(0)


def _linear_t(v: torch.Tensor) -> tuple[torch.Tensor, ...]:
    """Entries (l00, l01, l10, l11) of R . ShearX . ShearY . S."""
    theta, sx, sy, kx, ky = v[2], v[3], v[4], v[5], v[6]
    c, s = torch.cos(theta), torch.sin(theta)
    m00 = (1.0 + kx * ky) * sx
    m01 = kx * sy
    m10 = ky * sx
    m11 = sy
    return (c * m00 - s * m10, c * m01 - s * m11,
            s * m00 + c * m10, s * m01 + c * m11)


class _Scene:
    """Tensors shared by every evaluation of one optimization problem."""

    def __init__(self, elements: Sequence[SourceElement], canvas: tuple[int, int],
                 background: np.ndarray, target: np.ndarray | None,
                 origin: Sequence[float], shape: Sequence[int]):
        width, height = canvas
        self.canvas_anchor = torch.tensor([(width - 1) / 2.0, (height - 1) / 2.0],
                                          dtype=_DTYPE)
        self.canvas_width = float(width)
        self.sources = [_padded_premultiplied(e.image) for e in elements]
        self.anchors = [torch.as_tensor(e.anchor, dtype=_DTYPE) for e in elements]
        self.shape = (int(shape[0]), int(shape[1]))
        ys, xs = torch.meshgrid(torch.arange(self.shape[0], dtype=_DTYPE),
                                torch.arange(self.shape[1], dtype=_DTYPE),
                                indexing="ij")
        self.xs = xs + float(origin[0])
        self.ys = ys + float(origin[1])
        self.background = _t(background[..., :3]).permute(2, 0, 1)
        self.target = None if target is None else _t(target[..., :3]).permute(2, 0, 1)

    def warp(self, i: int, v: torch.Tensor) -> torch.Tensor:
        """Premultiplied (4, H, W) rendering of element i with params v."""
        l00, l01, l10, l11 = _linear_t(v)
        det = l00 * l11 - l01 * l10
        if abs(float(det)) < MIN_DETERMINANT:
            raise SingularTransformError(f"Transform determinant {float(det):.3g} is singular")
        px = self.xs - self.canvas_anchor[0] - v[0]
        py = self.ys - self.canvas_anchor[1] - v[1]
        u = (l11 * px - l01 * py) / det + self.anchors[i][0]
        w = (-l10 * px + l00 * py) / det + self.anchors[i][1]
        src = self.sources[i]
        hp, wp = src.shape[2], src.shape[3]
        gx = 2.0 * (u + 1.0) / (wp - 1) - 1.0
        gy = 2.0 * (w + 1.0) / (hp - 1) - 1.0
        grid = torch.stack([gx, gy], dim=-1).unsqueeze(0)
        out = F.grid_sample(src, grid, mode="bilinear", padding_mode="zeros",
                            align_corners=True)
        return out[0]

    def composite(self, x: torch.Tensor, tau: float, z_background: float) -> torch.Tensor:
        """Soft composite (3, H, W) for the (N, 8) variable matrix x."""
        if x.shape[0] == 0:
            return self.background.clone()
        layers = torch.stack([self.warp(i, x[i]) for i in range(x.shape[0])])
        color, alpha = layers[:, :3], layers[:, 3:4]
        z = x[:, 7].view(-1, 1, 1, 1)
        present = alpha > 0
        with torch.no_grad():
            masked_z = torch.where(present, z.expand_as(alpha),
                                   torch.full_like(alpha, -math.inf))
            shift = torch.clamp(masked_z.max(dim=0).values, min=z_background)
        exponent = torch.where(present, (z - shift) / tau, torch.zeros_like(alpha))
        weights = torch.exp(exponent) * present
        w_bg = torch.exp((z_background - shift) / tau)
        numerator = (color * weights).sum(dim=0) + self.background * w_bg
        denominator = (alpha * weights).sum(dim=0) + w_bg
        return numerator / torch.clamp(denominator, min=1e-300)


def _downsample2_t(img: torch.Tensor) -> torch.Tensor:
    """2x2 box downsample of a (C, H, W) tensor; odd leftovers fold in."""
    def halve(a: torch.Tensor, dim: int) -> torch.Tensor:
        n = a.shape[dim]
        half = n // 2
        even = a.narrow(dim, 0, 2 * half)
        shape = list(a.shape)
        shape[dim:dim + 1] = [half, 2]
        out = even.reshape(shape).sum(dim=dim + 1)
        if n % 2:
            last = out.narrow(dim, half - 1, 1) + a.narrow(dim, n - 1, 1)
            out = torch.cat([out.narrow(dim, 0, half - 1), last / 3.0 * 2.0], dim=dim)
        return out / 2.0
    return halve(halve(img, 1), 2)


def _pyramid_distance(rendered: torch.Tensor, target: torch.Tensor,
                      levels: int) -> torch.Tensor:
    levels = min(levels, max_pyramid_levels(rendered.shape[1], rendered.shape[2]))
    total = rendered.new_zeros(())
    a, b = rendered, target
    for level in range(levels):
        if level:
            a, b = _downsample2_t(a), _downsample2_t(b)
        total = total + torch.sqrt(((a - b) ** 2).sum() + 1e-20)
    return total


def _regularizer(x: torch.Tensor, prev: torch.Tensor, canvas_width: float) -> torch.Tensor:
    scale = torch.ones(len(PARAM_NAMES), dtype=_DTYPE)
    scale[0] = scale[1] = 1.0 / canvas_width
    return (torch.abs(x[:, :7] - prev) * scale).sum()


def _variables(elements: Sequence[SourceElement]) -> torch.Tensor:
    rows = [np.concatenate([e.params.as_vector(), [e.z]]) for e in elements]
    return _t(np.array(rows).reshape(-1, _N_VARS))


def _prev_tensor(elements: Sequence[SourceElement],
                 prev_params: Sequence[AffineParams] | None) -> torch.Tensor:
    if prev_params is None:
        prev_params = [e.params for e in elements]
    if len(prev_params) != len(elements):
        raise ValueError(f"Expected {len(elements)} previous parameter sets, "
                         f"got {len(prev_params)}")
    return _t(np.array([p.as_vector() for p in prev_params]).reshape(-1, 7))


def _background_or_black(background: np.ndarray | None, height: int,
                         width: int) -> np.ndarray:
    if background is None:
        return np.zeros((height, width, 3))
    background = np.asarray(background, dtype=np.float64)
    if background.shape[:2] != (height, width):
        raise DimensionMismatchError(
            f"Background size {background.shape[:2]} does not match canvas "
            f"{(height, width)}")
    return background


def composite_soft(ps: PlacementSet, background: RasterImage, tau: float,
                   z_background: float = -1.0) -> RasterImage:
    """Soft-layered composite of a placement set.

    Raises:
        ValueError: If tau is not positive.
        DimensionMismatchError: If the background does not match the canvas.
    """
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    background = _background_or_black(background, ps.height, ps.width)
    scene = _Scene(ps.elements, ps.canvas, background, None, (0.0, 0.0),
                   (ps.height, ps.width))
    with torch.no_grad():
        out = scene.composite(_variables(ps.elements), tau, z_background)
    return out.permute(1, 2, 0).numpy().copy()


def _loss_t(scene: _Scene, x: torch.Tensor, prev: torch.Tensor, tau: float,
            cfg: DcConfig, reg_weight: float) -> torch.Tensor:
    rendered = scene.composite(x, tau, cfg.z_background)
    loss = _pyramid_distance(rendered, scene.target, cfg.pyramid_levels)
    if reg_weight and x.shape[0]:
        loss = loss + reg_weight * _regularizer(x, prev, scene.canvas_width)
    return loss


def dc_loss_with_grad(ps: PlacementSet, target: RasterImage,
                      prev_params: Sequence[AffineParams] | None,
                      cfg: DcConfig | None = None, *,
                      background: RasterImage | None = None
                      ) -> tuple[float, NDArray[np.float64]]:
    """dc_loss and its gradient.

    Returns:
        (loss, gradient) where gradient has shape (N, 8): the seven affine
        params in declaration order, then z.
    """
    cfg = cfg or DcConfig()
    target = np.asarray(target, dtype=np.float64)
    if target.shape[:2] != (ps.height, ps.width):
        raise DimensionMismatchError(
            f"Target size {target.shape[:2]} does not match canvas {(ps.height, ps.width)}")
    background = _background_or_black(background, ps.height, ps.width)
    scene = _Scene(ps.elements, ps.canvas, background, target, (0.0, 0.0),
                   (ps.height, ps.width))
    x = _variables(ps.elements).requires_grad_(True)
    loss = _loss_t(scene, x, _prev_tensor(ps.elements, prev_params), cfg.tau,
                   cfg, cfg.reg_weight)
    loss.backward()
    grad = x.grad.numpy().copy() if x.grad is not None else np.zeros((0, _N_VARS))
    return float(loss.detach()), grad


def dc_loss(ps: PlacementSet, target: RasterImage,
            prev_params: Sequence[AffineParams] | None,
            cfg: DcConfig | None = None, *,
            background: RasterImage | None = None) -> float:
    """Multi-scale L2 distance of the soft composite plus L1 regularization.

    The data term sums, over pyramid levels, the Euclidean norm of the RGB
    difference. The regularizer is reg_weight times the L1 distance of each
    element's seven params from prev_params, with translation measured in
    canvas widths. A missing background is black.

    Raises:
        DimensionMismatchError: If target or background differ from the canvas.
    """
    cfg = cfg or DcConfig()
    target = np.asarray(target, dtype=np.float64)
    if target.shape[:2] != (ps.height, ps.width):
        raise DimensionMismatchError(
            f"Target size {target.shape[:2]} does not match canvas {(ps.height, ps.width)}")
    background = _background_or_black(background, ps.height, ps.width)
    scene = _Scene(ps.elements, ps.canvas, background, target, (0.0, 0.0),
                   (ps.height, ps.width))
    with torch.no_grad():
        loss = _loss_t(scene, _variables(ps.elements),
                       _prev_tensor(ps.elements, prev_params), cfg.tau, cfg,
                       cfg.reg_weight)
    return float(loss)


@dataclass
class DcResult:
    """Outcome of dc_optimize.

    Attributes:
        placements: Optimized placements; z holds integer ranks 0..N-1.
        loss: Final loss at the final temperature.
        continuous_z: Depths before rank rounding, in element order.
        iterations: Iterations run.
        loss_history: Loss after every accepted step, one list per
            temperature phase.
    """
    placements: PlacementSet
    loss: float
    continuous_z: list[float]
    iterations: int
    loss_history: list[list[float]] = field(default_factory=list)


def _rank_z(z: Sequence[float]) -> list[float]:
    order = sorted(range(len(z)), key=lambda i: (z[i], i))
    ranks = [0.0] * len(z)
    for rank, i in enumerate(order):
        ranks[i] = float(rank)
    return ranks


def dc_optimize(sources: Sequence[SourceElement], target: RasterImage,
                cfg: DcConfig | None = None, *,
                background: RasterImage | None = None,
                prev_params: Sequence[AffineParams] | None = None,
                roi: tuple[int, int, int, int] | None = None) -> DcResult:
    """Jointly fit the seven affine params and depth of every source.

    Normalized-gradient descent with momentum and per-group step sizes. A
    step that raises the loss (or produces a singular transform) is
    rejected, the steps are halved and the momentum reset, so accepted
    losses never increase within a temperature phase. The temperature is
    multiplied by cfg.tau_decay every cfg.tau_every iterations.

    Args:
        sources: Elements with their initial params and depths.
        target: Image to reproduce; sets the canvas size.
        cfg: Optimizer settings.
        background: Background behind all elements (black if omitted).
        prev_params: Regularization anchors; the initial params by default.
        roi: Optional (x0, y0, x1, y1) canvas window; the loss is evaluated
            on that window only.

    Returns:
        A DcResult.

    Raises:
        ValueError: If sources is empty.
        DimensionMismatchError: If background and target differ in size.
    """
    if not sources:
        raise ValueError("dc_optimize needs at least one source")
    cfg = cfg or DcConfig()
    target = np.asarray(target, dtype=np.float64)
    height, width = target.shape[:2]
    background = _background_or_black(background, height, width)
    if roi is None:
        roi = (0, 0, width, height)
    x0, y0, x1, y1 = (int(v) for v in roi)
    x0, y0 = max(0, x0), max(0, y0)
    x1, y1 = min(width, x1), min(height, y1)
    if x1 <= x0 or y1 <= y0:
        x0, y0, x1, y1 = 0, 0, width, height
    scene = _Scene(sources, (width, height), background[y0:y1, x0:x1],
                   target[y0:y1, x0:x1], (x0, y0), (y1 - y0, x1 - x0))
    prev = _prev_tensor(sources, prev_params)

    base_steps = torch.tensor([cfg.step_translation, cfg.step_translation,
                               cfg.step_angle, cfg.step_scale, cfg.step_scale,
                               cfg.step_scale, cfg.step_scale, cfg.step_z],
                              dtype=_DTYPE)
    groups = [(0, 2), (2, 3), (3, 7), (7, 8)]
    steps = base_steps.clone()
    tau = cfg.tau

    def evaluate(x: torch.Tensor) -> tuple[float, torch.Tensor]:
        x = x.detach().clone().requires_grad_(True)
        loss = _loss_t(scene, x, prev, tau, cfg, cfg.reg_weight)
        loss.backward()
        return float(loss.detach()), x.grad.detach().clone()

    x = _variables(sources)
    loss, grad = evaluate(x)
    history = [[loss]]
    velocity = torch.zeros_like(x)
    momentum_steps = 0
    iteration = 0
    while iteration < cfg.max_iters and loss > 0.0:
        iteration += 1
        if iteration % cfg.tau_every == 0:
            tau *= cfg.tau_decay
            loss, grad = evaluate(x)
            history.append([loss])
            velocity.zero_()
            momentum_steps = 0

        direction = torch.zeros_like(grad)
        for lo, hi in groups:
            block = grad[:, lo:hi]
            scale = torch.sqrt((block ** 2).mean())
            if float(scale) > 0.0:
                direction[:, lo:hi] = block / scale
        velocity = cfg.momentum * velocity + (1.0 - cfg.momentum) * direction
        momentum_steps += 1
        corrected = velocity / (1.0 - cfg.momentum ** momentum_steps)
        candidate = x - steps * corrected
        candidate[:, 3:5] = torch.clamp(candidate[:, 3:5], min=_MIN_SCALE)

        try:
            new_loss, new_grad = evaluate(candidate)
        except SingularTransformError:
            new_loss, new_grad = math.inf, grad

        if new_loss <= loss:
            improvement = loss - new_loss
            x, loss, grad = candidate, new_loss, new_grad
            history[-1].append(loss)
            if improvement < cfg.convergence_tol:
                break
        else:
            steps = steps * 0.5
            velocity.zero_()
            momentum_steps = 0
            logger.debug("dc_optimize: step rejected at iteration %d "
                         "(loss %.6g -> %.6g), halving steps", iteration, loss, new_loss)
            if float((steps / base_steps).max()) < cfg.min_step_fraction:
                break

    values = x.detach().numpy()
    continuous_z = [float(v) for v in values[:, 7]]
    ranks = _rank_z(continuous_z)
    elements = [SourceElement(element_id=e.element_id, image=e.image,
                              params=AffineParams.from_vector(values[i, :7]),
                              z=ranks[i], anchor=e.anchor)
                for i, e in enumerate(sources)]
    logger.debug("dc_optimize: %d sources, %d iterations, loss %.6g",
                 len(sources), iteration, loss)
    return DcResult(placements=PlacementSet(elements, (width, height)), loss=loss,
                    continuous_z=continuous_z, iterations=iteration,
                    loss_history=history)
