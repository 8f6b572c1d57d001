"""Cost-exponential maps: round trips, Newton behavior, domains."""

import numpy as np
import pytest

from mtwkit import CostSpec, Point, make_cost
from mtwkit.errors import OutsideDomainError
from mtwkit.geometry import to_frame
from mtwkit.transport import (
    DomainSpec,
    box,
    c_exp,
    c_exp_inverse,
    cstar_exp,
    cstar_exp_inverse,
    symmetry_residual,
)

from conftest import CATALOG, build, sample_pair


@pytest.mark.parametrize("cost_id,params", CATALOG)
def test_c_exp_round_trip(cost_id, params, rng):
    cost = build(cost_id, params=params)
    for _ in range(20):
        x, y = sample_pair(cost, rng)
        p = to_frame(x, c_exp_inverse(cost, x, y).components)
        res = c_exp(cost, x, p)
        assert np.max(np.abs(res.target.coords - y.coords)) < 1e-8
        assert res.residual < 1e-10


@pytest.mark.parametrize("cost_id,params", CATALOG)
def test_cstar_exp_round_trip(cost_id, params, rng):
    cost = build(cost_id, params=params)
    for _ in range(10):
        x, y = sample_pair(cost, rng)
        q = to_frame(y, cstar_exp_inverse(cost, x, y).components)
        res = cstar_exp(cost, y, q)
        assert np.max(np.abs(res.target.coords - x.coords)) < 1e-8


def test_newton_path_without_closed_form(rng):
    # The perturbed quadratic has no closed-form inverse: the damped
    # Newton iteration must do the work, and in few steps.
    cost = build("perturbed_quadratic")
    for _ in range(20):
        x, y = sample_pair(cost, rng)
        p = to_frame(x, c_exp_inverse(cost, x, y).components)
        res = c_exp(cost, x, p)
        assert np.max(np.abs(res.target.coords - y.coords)) < 1e-9
        assert 0 < res.iterations <= 20


@pytest.mark.parametrize("cost_id,params", CATALOG)
def test_mixed_hessian_symmetry(cost_id, params, rng):
    cost = build(cost_id, params=params)
    n = cost.manifold.dim
    for _ in range(5):
        x, y = sample_pair(cost, rng)
        eta = rng.normal(size=n)
        xi = rng.normal(size=n)
        assert symmetry_residual(cost, x, y, eta, xi) < 1e-6


def test_momentum_domain_boundaries():
    sq = build("sqrt")
    x = Point(sq.manifold, [0.0, 0.0])
    with pytest.raises(OutsideDomainError):
        c_exp(sq, x, np.array([1.0, 0.0]))
    lg = build("log")
    with pytest.raises(OutsideDomainError):
        c_exp(lg, x, np.array([0.0, 0.0]))
    sp = build("sphere_dist_sq")
    xs = Point(sp.manifold, [1.0, 0.0, 0.0])
    with pytest.raises(OutsideDomainError):
        c_exp(sp, xs, np.array([np.pi, 0.0]))


def test_target_domain_containment():
    cost = build("quadratic")
    x = Point(cost.manifold, [0.0, 0.0])
    dom = box(cost.manifold, [-1, -1], [1, 1])
    assert c_exp(cost, x, np.array([0.5, 0.5]), domain=dom).target.coords[0] == 0.5
    with pytest.raises(OutsideDomainError):
        c_exp(cost, x, np.array([2.0, 0.0]), domain=dom)


def test_domain_spec_membership_and_sampling(rng):
    from mtwkit.geometry import euclidean, sphere

    dom = box(euclidean(2), [-1, -1], [1, 1])
    assert dom.contains(Point(euclidean(2), [0.5, -0.5]))
    assert not dom.contains(Point(euclidean(2), [1.5, 0.0]))
    pts = dom.sample(rng, 50)
    assert pts.shape == (50, 2) and np.all(np.abs(pts) <= 1.0)
    cap = DomainSpec(sphere(2), "sphere_cap", center=(0, 0, 1.0), angle=0.5)
    pts = cap.sample(rng, 20)
    assert np.all(np.arccos(np.clip(pts @ np.array([0, 0, 1.0]), -1, 1)) <= 0.5 + 1e-12)
    with pytest.raises(ValueError):
        DomainSpec(euclidean(2), "pentagon")
    with pytest.raises(ValueError):
        box(euclidean(2), [1, 1], [0, 0])
