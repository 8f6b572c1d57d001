"""Discrete potentials, subdifferentials, CSIS and connectivity."""

import numpy as np
import pytest

from mtwkit import Point
from mtwkit.convexity import (
    DiscreteCPotential,
    c_star_transform,
    c_subdifferential,
    c_transform_eval,
    connectivity_check,
    contact_set,
    crease_points,
    csis_check,
    hull_membership,
    subdifferential,
    support_margin,
    two_mountain_potential,
)
from mtwkit.errors import SingularPairError

from conftest import build, sample_pair


def _quad_crease():
    cost = build("quadratic")
    m = cost.manifold
    phi = DiscreteCPotential(cost, [(Point(m, [-1.0, 0.0]), 0.0),
                                    (Point(m, [1.0, 0.0]), 0.0)])
    return cost, phi, Point(m, [0.0, 0.0])


def test_single_mountain_value():
    cost = build("quadratic")
    m = cost.manifold
    phi = DiscreteCPotential(cost, [(Point(m, [1.0, 0.0]), 0.0)])
    assert abs(c_transform_eval(phi, Point(m, [0.0, 0.0])) + 0.5) < 1e-14


def test_contact_set_examples():
    cost, phi, x0 = _quad_crease()
    m = cost.manifold
    assert contact_set(phi, x0).active == [0, 1]
    assert contact_set(phi, Point(m, [0.5, 0.0])).active == [1]
    single = DiscreteCPotential(cost, [phi.support[0]])
    assert contact_set(single, x0).active == [0]


def test_subdifferential_crease_hull():
    _, phi, x0 = _quad_crease()
    sd = subdifferential(phi, x0)
    gens = np.sort(sd.generators[:, 0])
    assert np.allclose(gens, [-1.0, 1.0])
    assert sd.contains(np.array([0.0, 0.0]))
    assert sd.contains(np.array([0.7, 0.0]))
    assert not sd.contains(np.array([0.0, 0.1]))
    assert not sd.contains(np.array([1.2, 0.0]))
    csd = c_subdifferential(phi, x0)
    assert not csd.contains(np.array([0.0, 0.0]))  # finite set, no hull
    assert csd.contains(np.array([1.0, 0.0]))


def test_c_subdiff_subset_of_subdiff(rng):
    for cost_id in ("quadratic", "log", "sqrt"):
        cost = build(cost_id)
        x_m, y0 = sample_pair(cost, rng)
        _, y1 = sample_pair(cost, rng)
        phi = two_mountain_potential(cost, x_m, y0, y1)
        csd = c_subdifferential(phi, x_m)
        sd = subdifferential(phi, x_m)
        assert len(csd.generators) == 2
        for g in csd.generators:
            assert sd.contains(g)


def test_c_subdiff_matches_fd_gradients(rng):
    from mtwkit.costs import fd_oracle

    cost = build("log")
    x_m, y0 = sample_pair(cost, rng)
    _, y1 = sample_pair(cost, rng)
    phi = two_mountain_potential(cost, x_m, y0, y1)
    csd = c_subdifferential(phi, x_m)
    want = {0: -fd_oracle(cost, x_m, y0, "grad_x"), 1: -fd_oracle(cost, x_m, y1, "grad_x")}
    for g in csd.generators:
        assert min(np.max(np.abs(g - w)) for w in want.values()) < 1e-6


def test_hull_membership_agrees_with_support_function(rng):
    # Definition-level oracle: p is in the hull iff no direction separates
    # it from the generators.
    gens = rng.uniform(-1, 1, size=(5, 3))
    for _ in range(20):
        lam = rng.dirichlet(np.ones(5))
        p_in = lam @ gens
        assert hull_membership(gens, p_in)
        p_out = p_in + rng.normal(size=3) * 2.0
        member = hull_membership(gens, p_out)
        dirs = rng.normal(size=(1000, 3))
        separated = np.any(dirs @ p_out > np.max(gens @ dirs.T, axis=0) + 1e-9)
        if separated:
            assert not member


def test_double_legendre_inequality(rng):
    cost = build("log")
    x_m, y0 = sample_pair(cost, rng)
    _, y1 = sample_pair(cost, rng)
    phi = two_mountain_potential(cost, x_m, y0, y1)
    x_grid = rng.uniform(-1.5, 1.5, size=(200, 2))
    duals = c_star_transform(phi, [y for y, _ in phi.support], x_grid)
    X = phi.filter_admissible(rng.uniform(-1, 1, size=(50, 2)))
    for row in X:
        x = Point(cost.manifold, row)
        if not all(cost.admissible(x, y) for y, _ in duals):
            continue
        back = max(-cost.value(x, y) - v for y, v in duals)
        assert back >= phi.value(x) - 1e-9


def test_c_star_transform_single_mountain():
    cost = build("quadratic")
    m = cost.manifold
    y1 = Point(m, [1.0, 0.0])
    phi = DiscreteCPotential(cost, [(y1, 0.25)])
    grid = np.stack(np.meshgrid(np.linspace(-2, 2, 65), np.linspace(-2, 2, 65),
                                indexing="ij"), -1).reshape(-1, 2)
    [(_, v)] = c_star_transform(phi, [y1], grid)
    assert abs(v - 0.25) < 1e-9  # grid contains the touching point (1, 0)


def test_csis_quadratic_baseline(rng):
    cost, phi, x0 = _quad_crease()
    z = np.stack(np.meshgrid(np.linspace(-2, 2, 25), np.linspace(-2, 2, 25),
                             indexing="ij"), -1).reshape(-1, 2)
    rep = csis_check(phi, [x0], z, n_hull_probes=8, seed=1)
    assert rep.verdict == "pass"
    assert rep.worst_margin <= 1e-9


def test_csis_and_connectivity_flag_power4(rng):
    cost = build("power")
    z = np.stack(np.meshgrid(np.linspace(-2, 2, 33), np.linspace(-2, 2, 33),
                             indexing="ij"), -1).reshape(-1, 2)
    from mtwkit.mountains import dasm_check

    for _ in range(100):
        x_m, y0 = sample_pair(cost, rng)
        _, y1 = sample_pair(cost, rng)
        if np.linalg.norm(y0.coords - y1.coords) < 0.5:
            continue
        X = rng.uniform(-1.5, 1.5, size=(64, 2))
        if dasm_check(cost, x_m, y0, y1, X).verdict != "violated":
            continue
        phi = two_mountain_potential(cost, x_m, y0, y1)
        rep = csis_check(phi, [x_m], z, n_hull_probes=16, seed=2)
        assert rep.verdict == "violated"
        repc = connectivity_check(phi, x_m, n_theta=17)
        assert repc.verdict == "violated"
        return
    pytest.fail("no violating configuration found")


def test_support_margin_sign():
    cost, phi, x0 = _quad_crease()
    z = np.stack(np.meshgrid(np.linspace(-2, 2, 21), np.linspace(-2, 2, 21),
                             indexing="ij"), -1).reshape(-1, 2)
    # An active mountain supports globally: nonpositive margin.
    assert support_margin(phi, x0, phi.support[0][0], z) <= 1e-12


def test_crease_search_finds_tie_points(rng):
    cost = build("quadratic")
    m = cost.manifold
    phi = DiscreteCPotential(cost, [(Point(m, [-1.0, 0.0]), 0.0),
                                    (Point(m, [1.0, 0.0]), 0.0)])
    pts = crease_points(phi, 0, 1, [-1, -1], [1, 1], n_points=4, seed=3)
    assert pts
    for x in pts:
        assert abs(x.coords[0]) < 1e-7


def test_inadmissible_query_raises():
    cost = build("log")
    m = cost.manifold
    phi = DiscreteCPotential(cost, [(Point(m, [1.0, 0.0]), 0.0)])
    with pytest.raises(SingularPairError):
        c_transform_eval(phi, Point(m, [1.0, 0.01]))


def test_connectivity_requires_a_crease():
    cost, phi, _ = _quad_crease()
    with pytest.raises(ValueError):
        connectivity_check(phi, Point(cost.manifold, [0.5, 0.0]))
