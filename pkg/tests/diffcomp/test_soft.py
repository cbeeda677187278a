import numpy as np
import pytest

from motionvec.configuration.module_configs import DcConfig
from motionvec.diffcomp.affine import AffineParams
from motionvec.diffcomp.placement import PlacementSet, SourceElement
from motionvec.diffcomp.render import composite_hard
from motionvec.diffcomp.soft import (composite_soft, dc_loss, dc_loss_with_grad,
                                     dc_optimize)
from motionvec.exceptions import DimensionMismatchError

from .conftest import BLUE, RED, solid


def _single(tx=0.0, size=10, canvas=32):
    e = SourceElement(1, solid(RED, size), AffineParams.translation(tx, 0.0))
    return PlacementSet([e], (canvas, canvas))


def test_small_tau_approaches_hard():
    """At a low temperature soft and hard compositing agree."""
    ps = PlacementSet([SourceElement(1, solid(RED), z=0.0),
                       SourceElement(2, solid(BLUE), AffineParams.translation(2.0, 0.0),
                                     z=1.0)], (10, 10))
    bg = np.ones((10, 10, 3))
    assert np.allclose(composite_soft(ps, bg, tau=1e-3), composite_hard(ps, bg), atol=1e-6)


def test_equal_depth_averages():
    """Fully overlapping elements at equal depth blend evenly."""
    ps = PlacementSet([SourceElement(1, solid(RED)), SourceElement(2, solid(BLUE))], (4, 4))
    out = composite_soft(ps, np.ones((4, 4, 3)), tau=1e-3)
    assert np.allclose(out, [0.5, 0.1, 0.5], atol=1e-6)


def test_high_tau_leaks_background():
    """A warm temperature lets the background show through."""
    ps = PlacementSet([SourceElement(1, solid(RED))], (4, 4))
    out = composite_soft(ps, np.zeros((4, 4, 3)), tau=1.0)
    assert 0.0 < out[0, 0, 0] < 0.9


def test_composite_soft_validation():
    """tau must be positive and the background must fit."""
    with pytest.raises(ValueError):
        composite_soft(_single(), np.ones((32, 32, 3)), tau=0.0)
    with pytest.raises(DimensionMismatchError):
        composite_soft(_single(), np.ones((8, 8, 3)), tau=0.1)


def test_loss_vanishes_at_target():
    """A placement that reproduces its target has near-zero loss."""
    ps = _single()
    bg = np.ones((32, 32, 3))
    target = composite_hard(ps, bg)
    assert dc_loss(ps, target, None, background=bg) < 1e-6


def test_regularizer_measures_canvas_widths():
    """A full canvas width from the anchor costs reg_weight."""
    ps = _single()
    bg = np.ones((32, 32, 3))
    target = composite_hard(ps, bg)
    base = dc_loss(ps, target, None, background=bg)
    pulled = dc_loss(ps, target, [AffineParams.translation(32.0, 0.0)], background=bg)
    assert pulled - base == pytest.approx(0.01, abs=1e-9)


def test_loss_with_grad_matches_loss():
    """Gradient evaluation returns the same loss and one row per element."""
    ps = _single(tx=2.0)
    bg = np.ones((32, 32, 3))
    target = composite_hard(_single(), bg)
    loss, grad = dc_loss_with_grad(ps, target, None, background=bg)
    assert loss == pytest.approx(dc_loss(ps, target, None, background=bg))
    assert grad.shape == (1, 8)
    assert grad[0, 0] > 0.0


def test_loss_target_mismatch():
    """The target must match the canvas."""
    with pytest.raises(DimensionMismatchError):
        dc_loss(_single(), np.ones((8, 8, 3)), None)
    with pytest.raises(ValueError):
        dc_loss(_single(), np.ones((32, 32, 3)), [])


def test_optimize_recovers_translation():
    """A three pixel offset is closed and the loss never rises within a phase."""
    bg = np.ones((32, 32, 3))
    target = composite_hard(_single(tx=3.0), bg)
    result = dc_optimize(_single().elements, target, DcConfig(max_iters=150),
                         background=bg)
    params = result.placements.get(1).params
    assert params.tx == pytest.approx(3.0, abs=0.25)
    assert params.ty == pytest.approx(0.0, abs=0.25)
    assert result.loss < result.loss_history[0][0]
    for phase in result.loss_history:
        assert all(b <= a for a, b in zip(phase, phase[1:]))
    assert result.placements.get(1).z == 0.0
    assert result.iterations <= 150


def test_optimize_ranks_depth():
    """Continuous depths come back as integer ranks."""
    bg = np.ones((16, 16, 3))
    sources = [SourceElement(1, solid(RED), z=5.0), SourceElement(2, solid(BLUE), z=-2.0)]
    target = composite_hard(PlacementSet(sources, (16, 16)), bg)
    result = dc_optimize(sources, target, DcConfig(max_iters=5), background=bg)
    assert [e.z for e in result.placements.elements] == [1.0, 0.0]
    assert len(result.continuous_z) == 2


def test_optimize_needs_sources():
    """An empty problem is rejected."""
    with pytest.raises(ValueError):
        dc_optimize([], np.ones((4, 4, 3)))


def _translated_scene(rows, images, canvas):
    """Elements from (tx, ty, z) rows."""
    return PlacementSet([SourceElement(i + 1, img, AffineParams.translation(tx, ty), z=z)
                         for i, ((tx, ty, z), img) in enumerate(zip(rows, images))],
                        (canvas, canvas))


def _random_solid(rng, width, height):
    img = np.ones((height, width, 4))
    img[..., :3] = rng.random(3)
    return img


def test_translation_gradient_matches_finite_differences_at_edges():
    """Translation and depth gradients of solid blocks agree with central differences."""
    rng = np.random.default_rng(7)
    canvas, h = 24, 1e-3
    cfg = DcConfig(tau=0.2)
    bg = np.ones((canvas, canvas, 3))
    identity = [AffineParams(), AffineParams()]
    for _ in range(20):
        images = [_random_solid(rng, *rng.choice([6, 8], size=2)) for _ in range(2)]
        # Fractional offsets stay clear of texel boundaries, where bilinear
        # resampling has kinks.
        rows = np.column_stack([rng.integers(-4, 5, size=(2, 2)) + rng.uniform(0.2, 0.8, (2, 2)),
                                rng.uniform(0.0, 1.0, 2)])
        target = composite_hard(_translated_scene(rng.integers(-3, 4, size=(2, 3)),
                                                  images, canvas), bg)
        _, grad = dc_loss_with_grad(_translated_scene(rows, images, canvas), target,
                                    identity, cfg, background=bg)
        analytic = grad[:, [0, 1, 7]]
        numeric = np.zeros_like(analytic)
        for i in range(2):
            for j in range(3):
                up, down = rows.copy(), rows.copy()
                up[i, j] += h
                down[i, j] -= h
                numeric[i, j] = (dc_loss(_translated_scene(up, images, canvas), target,
                                         identity, cfg, background=bg)
                                 - dc_loss(_translated_scene(down, images, canvas), target,
                                           identity, cfg, background=bg)) / (2 * h)
        assert np.linalg.norm(analytic) > 0.0
        assert np.linalg.norm(numeric - analytic) <= 1e-3 * np.linalg.norm(analytic)


def test_soft_matches_hard_on_random_scenes():
    """With distinct ranks and whole-pixel offsets, soft at low tau equals hard."""
    rng = np.random.default_rng(11)
    canvas = 20
    for _ in range(50):
        n = int(rng.integers(1, 5))
        images = [_random_solid(rng, *rng.choice([2, 4, 6, 8], size=2)) for _ in range(n)]
        rows = np.column_stack([rng.integers(-8, 9, size=(n, 2)), rng.permutation(n)])
        ps = _translated_scene(rows.astype(float), images, canvas)
        bg = rng.random((canvas, canvas, 3))
        assert np.allclose(composite_soft(ps, bg, tau=1e-3), composite_hard(ps, bg),
                           atol=1e-6)


def _ramp(rng, size=64):
    """An opaque source whose colors are affine in the pixel position."""
    ys, xs = np.mgrid[0:size, 0:size] / (size - 1.0)
    img = np.ones((size, size, 4))
    for c in range(3):
        img[..., c] = (rng.uniform(0.4, 0.6) + rng.uniform(-0.2, 0.2) * xs
                       + rng.uniform(-0.2, 0.2) * ys)
    return img


def _affine_scene(rows, images, canvas):
    """Elements from rows of seven affine params followed by z."""
    return PlacementSet([SourceElement(i + 1, img, AffineParams.from_vector(row[:7]), z=row[7])
                         for i, (row, img) in enumerate(zip(rows, images))], (canvas, canvas))


def _away_from(center, rng, low, high):
    return center + float(rng.uniform(low, high) * rng.choice([-1.0, 1.0]))


def test_gradient_matches_finite_differences_for_every_parameter():
    """All seven affine gradients and z agree with central differences."""
    rng = np.random.default_rng(9)
    canvas, h = 16, 1e-3
    cfg = DcConfig(tau=0.2)
    bg = np.ones((canvas, canvas, 3))
    identity = [AffineParams(), AffineParams()]
    for _ in range(20):
        # Sources reach past the canvas on every side, so resampling stays
        # linear across each pixel's neighborhood.
        images = [_ramp(rng), _ramp(rng)]
        x = np.array([[_away_from(0.0, rng, 0.2, 2.0), _away_from(0.0, rng, 0.2, 2.0),
                       _away_from(0.0, rng, 0.05, 0.3), _away_from(1.0, rng, 0.05, 0.2),
                       _away_from(1.0, rng, 0.05, 0.2), _away_from(0.0, rng, 0.05, 0.2),
                       _away_from(0.0, rng, 0.05, 0.2), rng.uniform(0.0, 0.5)]
                      for _ in range(2)])
        target = _ramp(rng, canvas)[..., :3]
        _, analytic = dc_loss_with_grad(_affine_scene(x, images, canvas), target, identity,
                                        cfg, background=bg)
        numeric = np.zeros_like(analytic)
        for i in range(2):
            for j in range(8):
                up, down = x.copy(), x.copy()
                up[i, j] += h
                down[i, j] -= h
                numeric[i, j] = (
                    dc_loss(_affine_scene(up, images, canvas), target, identity, cfg,
                            background=bg)
                    - dc_loss(_affine_scene(down, images, canvas), target, identity, cfg,
                              background=bg)) / (2 * h)
        assert np.linalg.norm(numeric - analytic) <= 1e-3 * np.linalg.norm(analytic)
