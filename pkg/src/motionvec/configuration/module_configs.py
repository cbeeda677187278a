"""Per-module configuration classes.

Each class is a ParameterizableMixin: constructor keyword defaults are the
documented defaults, values are validated on construction, and instances
serialize through the JSON processor.
"""
from typing import Any

from ..exceptions import ConfigError
from .parameterizable_mixin import ParameterizableMixin

__all__ = [
    "ImagingConfig",
    "SegmentationConfig",
    "FlowConfig",
    "DcConfig",
    "TrackerConfig",
    "RefineConfig",
    "EventConfig",
]


def _require(condition: bool, owner: str, field: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{owner}.{field} {message}")


class _Config(ParameterizableMixin):
    """Shared plumbing: params are the instance attributes named in __init__."""

    def get_params(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self.get_default_params()}


class ImagingConfig(_Config):
    """Raster primitive tunables.

    Args:
        hist_bins: Bins per Lab channel for color histograms.
        efd_orders: Number of elliptic Fourier harmonics in shape descriptors.
        canny_sigma: Gaussian smoothing for edge detection.
        canny_low: Low hysteresis threshold on [0,1] luminance.
        canny_high: High hysteresis threshold on [0,1] luminance.
    """

    def __init__(self, hist_bins: int = 64, efd_orders: int = 36,
                 canny_sigma: float = 1.0, canny_low: float = 0.1,
                 canny_high: float = 0.2):
        name = type(self).__name__
        _require(int(hist_bins) >= 2, name, "hist_bins", "must be >= 2")
        _require(int(efd_orders) >= 1, name, "efd_orders", "must be >= 1")
        _require(canny_sigma >= 0, name, "canny_sigma", "must be >= 0")
        _require(0 <= canny_low <= canny_high, name, "canny_low",
                 "must satisfy 0 <= canny_low <= canny_high")
        self.hist_bins = int(hist_bins)
        self.efd_orders = int(efd_orders)
        self.canny_sigma = float(canny_sigma)
        self.canny_low = float(canny_low)
        self.canny_high = float(canny_high)


class SegmentationConfig(_Config):
    """Segmentation tunables.

    Args:
        mode: "trapped_ball" (edge-aware filling) or "components"
            (4-connected components, for textured foregrounds).
        bg_clusters: k for background color clustering.
        bg_tolerance: Rescaled-Lab distance above which a pixel is foreground.
        bg_sample_frames: Maximum number of frames sampled for the background.
        bg_sample_stride: Pixel subsampling stride for the background.
        ball_radius_max: Largest trapped-ball radius; radii shrink to 1.
        min_area: Regions smaller than this are merged or dropped.
        edge_separation: Fraction of a shared boundary that must carry edge
            pixels for two adjacent fills to stay separate regions.
        seed: Random state for clustering.
    """

    def __init__(self, mode: str = "trapped_ball", bg_clusters: int = 8,
                 bg_tolerance: float = 0.08, bg_sample_frames: int = 8,
                 bg_sample_stride: int = 4, ball_radius_max: int = 3,
                 min_area: int = 10, edge_separation: float = 0.5,
                 seed: int = 0):
        name = type(self).__name__
        _require(mode in ("trapped_ball", "components"), name, "mode",
                 "must be 'trapped_ball' or 'components'")
        _require(int(bg_clusters) >= 1, name, "bg_clusters", "must be >= 1")
        _require(bg_tolerance >= 0, name, "bg_tolerance", "must be >= 0")
        _require(int(bg_sample_frames) >= 1, name, "bg_sample_frames", "must be >= 1")
        _require(int(bg_sample_stride) >= 1, name, "bg_sample_stride", "must be >= 1")
        _require(int(ball_radius_max) >= 1, name, "ball_radius_max", "must be >= 1")
        _require(int(min_area) >= 1, name, "min_area", "must be >= 1")
        _require(0 <= edge_separation <= 1, name, "edge_separation",
                 "must lie in [0, 1]")
        self.mode = mode
        self.bg_clusters = int(bg_clusters)
        self.bg_tolerance = float(bg_tolerance)
        self.bg_sample_frames = int(bg_sample_frames)
        self.bg_sample_stride = int(bg_sample_stride)
        self.ball_radius_max = int(ball_radius_max)
        self.min_area = int(min_area)
        self.edge_separation = float(edge_separation)
        self.seed = int(seed)


class FlowConfig(_Config):
    """Motion initialization tunables.

    Args:
        levels: Pyramid levels for block matching (clamped to what the
            frame size allows).
        block_size: Block edge length in pixels.
        search_radius: Per-level search window half-width in pixels.
        ransac_iters: RANSAC rounds.
        ransac_residual: Inlier residual threshold in pixels.
        ransac_min_inlier_ratio: Minimum inlier fraction for consensus.
        ransac_max_points: Correspondences subsampled for RANSAC.
        template_step_deg: Rotation stride of the template search.
        seed: Random state for RANSAC sampling.
    """

    def __init__(self, levels: int = 4, block_size: int = 8,
                 search_radius: int = 4, ransac_iters: int = 200,
                 ransac_residual: float = 1.5,
                 ransac_min_inlier_ratio: float = 0.5,
                 ransac_max_points: int = 2000,
                 template_step_deg: float = 1.0, seed: int = 0):
        name = type(self).__name__
        _require(int(levels) >= 1, name, "levels", "must be >= 1")
        _require(int(block_size) >= 1, name, "block_size", "must be >= 1")
        _require(int(search_radius) >= 0, name, "search_radius", "must be >= 0")
        _require(int(ransac_iters) >= 1, name, "ransac_iters", "must be >= 1")
        _require(ransac_residual > 0, name, "ransac_residual", "must be > 0")
        _require(0 <= ransac_min_inlier_ratio <= 1, name,
                 "ransac_min_inlier_ratio", "must lie in [0, 1]")
        _require(int(ransac_max_points) >= 3, name, "ransac_max_points", "must be >= 3")
        _require(template_step_deg > 0, name, "template_step_deg", "must be > 0")
        self.levels = int(levels)
        self.block_size = int(block_size)
        self.search_radius = int(search_radius)
        self.ransac_iters = int(ransac_iters)
        self.ransac_residual = float(ransac_residual)
        self.ransac_min_inlier_ratio = float(ransac_min_inlier_ratio)
        self.ransac_max_points = int(ransac_max_points)
        self.template_step_deg = float(template_step_deg)
        self.seed = int(seed)


class DcConfig(_Config):
    """Differentiable compositing optimizer tunables.

    Args:
        pyramid_levels: Loss pyramid depth K (clamped to the canvas size).
        tau: Initial softmax temperature.
        tau_decay: Multiplier applied to tau every tau_every iterations.
        tau_every: Annealing period in iterations.
        reg_weight: Weight of the L1 pull toward the initial parameters.
        max_iters: Iteration cap.
        convergence_tol: Stop once an accepted step improves the loss by
            less than this.
        momentum: Momentum coefficient.
        step_translation: Step for tx, ty in pixels.
        step_angle: Step for theta in radians.
        step_scale: Step for sx, sy, kx, ky.
        step_z: Step for the continuous depth.
        min_step_fraction: Stop once steps have been halved below this
            fraction of their initial size.
        z_background: Fixed background depth in the softmax.
        crop_margin: Padding in pixels around the region of interest when
            the optimizer works on a cropped window.
    """

    def __init__(self, pyramid_levels: int = 4, tau: float = 0.05,
                 tau_decay: float = 0.5, tau_every: int = 100,
                 reg_weight: float = 0.01, max_iters: int = 400,
                 convergence_tol: float = 1e-6, momentum: float = 0.9,
                 step_translation: float = 0.5, step_angle: float = 0.01,
                 step_scale: float = 0.005, step_z: float = 0.05,
                 min_step_fraction: float = 1e-3, z_background: float = -1.0,
                 crop_margin: int = 8):
        name = type(self).__name__
        _require(int(pyramid_levels) >= 1, name, "pyramid_levels", "must be >= 1")
        _require(tau > 0, name, "tau", "must be > 0")
        _require(0 < tau_decay <= 1, name, "tau_decay", "must lie in (0, 1]")
        _require(int(tau_every) >= 1, name, "tau_every", "must be >= 1")
        _require(reg_weight >= 0, name, "reg_weight", "must be >= 0")
        _require(int(max_iters) >= 0, name, "max_iters", "must be >= 0")
        _require(convergence_tol >= 0, name, "convergence_tol", "must be >= 0")
        _require(0 <= momentum < 1, name, "momentum", "must lie in [0, 1)")
        for field, value in (("step_translation", step_translation),
                             ("step_angle", step_angle),
                             ("step_scale", step_scale), ("step_z", step_z)):
            _require(value > 0, name, field, "must be > 0")
        _require(0 < min_step_fraction < 1, name, "min_step_fraction",
                 "must lie in (0, 1)")
        _require(int(crop_margin) >= 0, name, "crop_margin", "must be >= 0")
        self.pyramid_levels = int(pyramid_levels)
        self.tau = float(tau)
        self.tau_decay = float(tau_decay)
        self.tau_every = int(tau_every)
        self.reg_weight = float(reg_weight)
        self.max_iters = int(max_iters)
        self.convergence_tol = float(convergence_tol)
        self.momentum = float(momentum)
        self.step_translation = float(step_translation)
        self.step_angle = float(step_angle)
        self.step_scale = float(step_scale)
        self.step_z = float(step_z)
        self.min_step_fraction = float(min_step_fraction)
        self.z_background = float(z_background)
        self.crop_margin = int(crop_margin)


class TrackerConfig(_Config):
    """Tracking tunables.

    Args:
        epsilon: Greedy selection stops once the best score exceeds this.
        coarse_prune: Drop source/target pairs with zero coarse weight
            before running the optimizer.
        use_template: Try the rotation/scale template search as an
            initialization candidate.
        occlusion_margin: Distance in pixels within which a higher object
            counts as occluding (gates canonical updates).
        flow: Flow settings used for initialization.
        dc: Optimizer settings used for the per-frame graphs.
    """

    def __init__(self, epsilon: float = 0.1, coarse_prune: bool = False,
                 use_template: bool = True, occlusion_margin: int = 1,
                 flow: FlowConfig | None = None, dc: DcConfig | None = None):
        name = type(self).__name__
        _require(epsilon > 0, name, "epsilon", "must be > 0")
        _require(int(occlusion_margin) >= 0, name, "occlusion_margin", "must be >= 0")
        _require(flow is None or isinstance(flow, FlowConfig), name, "flow",
                 "must be a FlowConfig")
        _require(dc is None or isinstance(dc, DcConfig), name, "dc",
                 "must be a DcConfig")
        self.epsilon = float(epsilon)
        self.coarse_prune = bool(coarse_prune)
        self.use_template = bool(use_template)
        self.occlusion_margin = int(occlusion_margin)
        self.flow = flow if flow is not None else FlowConfig()
        self.dc = dc if dc is not None else DcConfig()


class RefineConfig(_Config):
    """Per-frame motion refinement tunables.

    Args:
        enabled: Run per-frame refinement against labeled pixels.
        min_visible_fraction: Skip frames where less than this fraction of
            the canonical area is labeled.
        max_iters: Optimizer iterations per frame.
        reg_weight: Regularization weight during refinement.
    """

    def __init__(self, enabled: bool = True, min_visible_fraction: float = 0.5,
                 max_iters: int = 150, reg_weight: float = 0.0):
        name = type(self).__name__
        _require(0 <= min_visible_fraction <= 1, name, "min_visible_fraction",
                 "must lie in [0, 1]")
        _require(int(max_iters) >= 0, name, "max_iters", "must be >= 0")
        _require(reg_weight >= 0, name, "reg_weight", "must be >= 0")
        self.enabled = bool(enabled)
        self.min_visible_fraction = float(min_visible_fraction)
        self.max_iters = int(max_iters)
        self.reg_weight = float(reg_weight)


class EventConfig(_Config):
    """Event and property query tunables.

    Args:
        held_tol: Parameter tolerance for held runs.
        contact_distance: Boundary distance below which objects touch.
        velocity_window: Frames on each side used for velocity change.
        speed_change_ratio: Relative speed change that counts as a
            collision response when no sign flip occurs.
        cycle_threshold: Normalized autocorrelation peak height for cycles.
        blend_window: Frames over which collision offsets fade to zero.
        color_clusters: k for the dominant-color query.
    """

    def __init__(self, held_tol: float = 1e-6, contact_distance: float = 2.0,
                 velocity_window: int = 3, speed_change_ratio: float = 0.5,
                 cycle_threshold: float = 0.7, blend_window: int = 5,
                 color_clusters: int = 4):
        name = type(self).__name__
        _require(held_tol >= 0, name, "held_tol", "must be >= 0")
        _require(contact_distance > 0, name, "contact_distance", "must be > 0")
        _require(int(velocity_window) >= 1, name, "velocity_window", "must be >= 1")
        _require(speed_change_ratio > 0, name, "speed_change_ratio", "must be > 0")
        _require(0 < cycle_threshold < 1, name, "cycle_threshold", "must lie in (0, 1)")
        _require(int(blend_window) >= 0, name, "blend_window", "must be >= 0")
        _require(int(color_clusters) >= 1, name, "color_clusters", "must be >= 1")
        self.held_tol = float(held_tol)
        self.contact_distance = float(contact_distance)
        self.velocity_window = int(velocity_window)
        self.speed_change_ratio = float(speed_change_ratio)
        self.cycle_threshold = float(cycle_threshold)
        self.blend_window = int(blend_window)
        self.color_clusters = int(color_clusters)
