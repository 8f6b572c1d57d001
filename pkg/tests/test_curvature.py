"""Cost-sectional curvature: structure, baselines, scanner behavior."""

import numpy as np
import pytest

from mtwkit.curvature import (
    c_sectional_curvature,
    orthogonal_unit_pair,
    sample_pairs,
    scan_a3,
)
from mtwkit.transport import box

from conftest import build, sample_pair


def test_quadratic_curvature_identically_zero(rng):
    cost = build("quadratic")
    for _ in range(20):
        x, y = sample_pair(cost, rng)
        eta, xi = orthogonal_unit_pair(rng, 2)
        assert abs(c_sectional_curvature(cost, x, y, eta, xi)) < 1e-12


def test_bilinear_quadratic_scaling(rng):
    # The curvature is quadratic in each slot separately.
    cost = build("log")
    x, y = sample_pair(cost, rng)
    eta, xi = orthogonal_unit_pair(rng, 2)
    base = c_sectional_curvature(cost, x, y, eta, xi)
    for a in (2.0, 3.0):
        v_eta = c_sectional_curvature(cost, x, y, a * eta, xi)
        assert abs(v_eta - a**2 * base) < 1e-4 * (1 + abs(base)) * a**2
        v_xi = c_sectional_curvature(cost, x, y, eta, a * xi)
        assert abs(v_xi - a**2 * base) < 1e-4 * (1 + abs(base)) * a**2


def test_richardson_consistency(rng):
    cost = build("sqrt")
    x, y = sample_pair(cost, rng)
    eta, xi = orthogonal_unit_pair(rng, 2)
    plain = c_sectional_curvature(cost, x, y, eta, xi, h_t=1e-3)
    rich = c_sectional_curvature(cost, x, y, eta, xi, h_t=1e-3, richardson=True)
    assert abs(plain - rich) < 1e-6 * (1 + abs(rich))


def test_step_convergence_fourth_order_quantity(rng):
    # Halving the step shrinks the second-difference truncation ~4x.
    cost = build("sqrt")
    x, y = sample_pair(cost, rng)
    eta, xi = orthogonal_unit_pair(rng, 2)
    exact = c_sectional_curvature(cost, x, y, eta, xi, h_t=1e-3, richardson=True)
    e1 = abs(c_sectional_curvature(cost, x, y, eta, xi, h_t=4e-2) - exact)
    e2 = abs(c_sectional_curvature(cost, x, y, eta, xi, h_t=2e-2) - exact)
    assert 2.5 < e1 / e2 < 6.0


def test_orthogonal_unit_pair_properties(rng):
    for n in (2, 3, 4):
        eta, xi = orthogonal_unit_pair(rng, n)
        assert abs(np.linalg.norm(eta) - 1) < 1e-12
        assert abs(np.linalg.norm(xi) - 1) < 1e-12
        assert abs(eta @ xi) < 1e-12


def test_sample_pairs_deterministic():
    cost = build("log")
    om = box(cost.manifold, [-1, -1], [1, 1])
    la = box(cost.manifold, [1.5, 1.5], [3, 3])
    a = sample_pairs(om, la, 16, seed=5, admissible=cost.admissible)
    b = sample_pairs(om, la, 16, seed=5, admissible=cost.admissible)
    assert len(a) == 16
    for (xa, ya), (xb, yb) in zip(a, b):
        assert np.array_equal(xa.coords, xb.coords)
        assert np.array_equal(ya.coords, yb.coords)


def test_scan_verdicts_and_determinism():
    om = box(build("log").manifold, [-1, -1], [1, 1])
    la = box(build("log").manifold, [1.5, 1.5], [3, 3])
    rep1 = scan_a3(build("log"), om, la, n_points=16, n_frames=4, seed=3)
    rep2 = scan_a3(build("log"), om, la, n_points=16, n_frames=4, seed=3)
    assert rep1.verdict == "A3S-consistent"
    assert rep1.values == rep2.values
    assert rep1.to_dict() == rep2.to_dict()
    bad = scan_a3(build("power"), om, la, n_points=16, n_frames=4, seed=3)
    assert bad.verdict == "violated"
    assert bad.argmin is not None and bad.argmin["value"] == bad.min_value


def test_scan_rejects_empty_budget():
    om = box(build("log").manifold, [-1, -1], [1, 1])
    with pytest.raises(ValueError):
        scan_a3(build("log"), om, om, n_points=0, n_frames=1)
