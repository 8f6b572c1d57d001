"""Sliding mountains: kinematics, DASM/monotonicity, fronts, the identity."""

import numpy as np
import pytest

from mtwkit import Point
from mtwkit.errors import SegmentLeavesDomainError
from mtwkit.geometry import chart_log
from mtwkit.mountains import (
    MountainField,
    build_c_segment,
    dasm_check,
    expansion_rate,
    front_ode_track,
    front_point,
    front_sample,
    lemma62_check,
    monotonicity_check,
    positivity_check,
    w_basis,
)
from mtwkit.transport import box

from conftest import build, sample_pair


def _segment(cost_id, rng, dim=2):
    cost = build(cost_id, dim=dim)
    x_m, y0 = sample_pair(cost, rng)
    for _ in range(50):
        _, y1 = sample_pair(cost, rng)
        if np.linalg.norm(y1.coords - y0.coords) > 0.5:
            break
    return cost, build_c_segment(cost, x_m, y0, y1)


@pytest.mark.parametrize("cost_id", ["quadratic", "log", "sqrt", "sphere_dist_sq"])
def test_normalization_at_midpoint(cost_id, rng):
    cost, seg = _segment(cost_id, rng)
    field = MountainField(cost, seg)
    for theta in (0.0, 0.31, 0.5, 0.77, 1.0):
        f, df, d2f = field.derivs(theta, seg.x_m)
        assert abs(f) < 1e-9
        assert abs(df) < 1e-9
        assert abs(d2f) < 1e-9


def test_kinematics_match_finite_differences(rng):
    cost, seg = _segment("log", rng)
    h = 1e-5
    for theta in (0.3, 0.6):
        kin = seg.kinematics(theta)
        y_p = seg.point_at(theta + h)
        y_m = seg.point_at(theta - h)
        ydot_fd = (chart_log(kin.y, y_p) - chart_log(kin.y, y_m)) / (2 * h)
        assert np.allclose(kin.ydot, ydot_fd, atol=1e-5 * (1 + np.linalg.norm(kin.ydot)))
        yddot_fd = (chart_log(kin.y, y_p) + chart_log(kin.y, y_m)) / h**2
        assert np.allclose(kin.yddot, yddot_fd, atol=1e-3 * (1 + np.linalg.norm(kin.yddot)))
        assert kin.residual < 1e-10


@pytest.mark.parametrize("cost_id", ["log", "sqrt", "perturbed_quadratic"])
def test_theta_derivatives_match_finite_differences(cost_id, rng):
    cost, seg = _segment(cost_id, rng)
    field = MountainField(cost, seg)
    for _ in range(5):
        x, _ = sample_pair(cost, rng)
        df_fd, d2f_fd = field.fd_theta_derivs(0.45, x)
        assert abs(field.df_dtheta(0.45, x) - df_fd) < 1e-6 * (1 + abs(df_fd))
        assert abs(field.d2f_dtheta2(0.45, x) - d2f_fd) < 1e-4 * (1 + abs(d2f_fd))


def test_x_gradients_match_finite_differences(rng):
    cost, seg = _segment("log", rng)
    field = MountainField(cost, seg)
    x, _ = sample_pair(cost, rng)
    h = 1e-6
    eye = np.eye(2)
    g_fd = np.array([
        (field.df_dtheta(0.4, Point(cost.manifold, x.coords + h * e))
         - field.df_dtheta(0.4, Point(cost.manifold, x.coords - h * e))) / (2 * h)
        for e in eye
    ])
    assert np.allclose(field.grad_x_df(0.4, x), g_fd, atol=1e-7 * (1 + np.max(np.abs(g_fd))))
    g2_fd = np.array([
        (field.d2f_dtheta2(0.4, Point(cost.manifold, x.coords + h * e))
         - field.d2f_dtheta2(0.4, Point(cost.manifold, x.coords - h * e))) / (2 * h)
        for e in eye
    ])
    assert np.allclose(field.grad_x_d2f(0.4, x), g2_fd, atol=1e-6 * (1 + np.max(np.abs(g2_fd))))
    # Structural: the gradient of the second derivative vanishes at x_m.
    assert np.linalg.norm(field.grad_x_d2f(0.4, seg.x_m)) < 1e-12


def test_vectorized_rows_match_scalars(rng):
    cost, seg = _segment("sqrt", rng)
    field = MountainField(cost, seg)
    X = rng.uniform(-1, 1, size=(8, 2))
    f = field.f_many(0.3, X)
    df = field.df_many(0.3, X)
    d2f = field.d2f_many(0.3, X)
    for k, row in enumerate(X):
        x = Point(cost.manifold, row)
        assert abs(f[k] - field.f(0.3, x)) < 1e-12
        assert abs(df[k] - field.df_dtheta(0.3, x)) < 1e-12
        assert abs(d2f[k] - field.d2f_dtheta2(0.3, x)) < 1e-12


@pytest.mark.parametrize("cost_id", ["quadratic", "log", "sqrt"])
def test_dasm_and_monotonicity_pass_together(cost_id, rng):
    cost = build(cost_id)
    x_m, y0 = sample_pair(cost, rng)
    _, y1 = sample_pair(cost, rng)
    X = rng.uniform(-1, 1, size=(32, 2))
    r1 = dasm_check(cost, x_m, y0, y1, X)
    r2 = monotonicity_check(cost, x_m, y0, y1, X)
    assert r1.verdict == "pass"
    assert r2.verdict == "pass"


def test_power4_violates_both_routes(rng):
    cost = build("power")
    found = False
    for _ in range(50):
        x_m, y0 = sample_pair(cost, rng)
        _, y1 = sample_pair(cost, rng)
        if np.linalg.norm(y0.coords - y1.coords) < 0.5:
            continue
        X = rng.uniform(-1.5, 1.5, size=(64, 2))
        r1 = dasm_check(cost, x_m, y0, y1, X)
        r2 = monotonicity_check(cost, x_m, y0, y1, X)
        assert (r1.verdict == "violated") == (r2.verdict == "violated")
        if r1.verdict == "violated":
            assert r1.witnesses and r2.witnesses
            found = True
            break
    assert found


def test_front_samples_sit_on_the_level_set(rng):
    cost, seg = _segment("log", rng)
    field = MountainField(cost, seg)
    for theta in (0.25, 0.5, 0.75):
        B = w_basis(field, theta)
        kin = field.kinematics(theta)
        assert np.allclose(B @ kin.ydot, 0.0, atol=1e-9)
        assert np.allclose(B @ B.T, np.eye(len(B)), atol=1e-12)
        samples = front_sample(cost, seg, theta, [np.array([w]) for w in (-0.2, 0.0, 0.2)])
        center = [s for s in samples if np.allclose(s.w, 0.0)][0]
        assert center.reachable
        assert np.max(np.abs(center.x_w.coords - seg.x_m.coords)) < 1e-8
        for s in samples:
            if s.reachable:
                assert s.df_residual < 1e-8
                assert np.isfinite(expansion_rate(cost, seg, theta, s.x_w))


def test_positivity_on_log_cost(rng):
    cost, seg = _segment("log", rng)
    rep = positivity_check(cost, seg, np.linspace(0.2, 0.8, 5),
                           [np.array([w]) for w in np.linspace(-0.3, 0.3, 7)],
                           strict=False)
    assert rep.verdict == "pass"
    assert rep.details["grad_at_xm"] < 1e-9
    assert rep.details["min_strict_value"] > 0.0


def test_lemma62_identity(rng):
    qc, qseg = _segment("quadratic", rng)
    lhs, rhs, res = lemma62_check(qc, qseg, 0.5, [0.0], [1.0])
    assert res < 1e-7
    cost, seg = _segment("log", rng)
    _, _, r1 = lemma62_check(cost, seg, 0.5, [0.0], [1.0], h_w=2e-3)
    _, _, r2 = lemma62_check(cost, seg, 0.5, [0.0], [1.0], h_w=1e-3)
    assert r2 < 1e-3
    assert 2.5 < r1 / r2 < 6.0


def test_front_ode_tracking_stays_on_front(rng):
    cost, seg = _segment("log", rng)
    field = MountainField(cost, seg)
    start = front_point(cost, seg, 0.25, [0.15])
    traj = front_ode_track(cost, seg, start.x_w, t_span=(0.25, 0.75), dt=5e-3)
    assert len(traj) == 101
    assert abs(field.df_dtheta(0.75, traj[-1])) < 1e-8


def test_collinear_log_segment_is_perturbed():
    cost = build("log")
    m = cost.manifold
    x_m = Point(m, [0.0, 0.0])
    # y0, y1 on opposite sides of x_m: the momentum segment crosses 0.
    seg = build_c_segment(cost, x_m, Point(m, [1.0, 0.0]), Point(m, [-1.0, 0.0]))
    assert seg.perturbed
    for y in seg.points:
        assert cost.admissible(x_m, y)


def test_segment_leaves_domain_raises():
    cost = build("quadratic")
    m = cost.manifold
    dom = box(m, [-1, -1], [1, 1])
    with pytest.raises(SegmentLeavesDomainError):
        build_c_segment(cost, Point(m, [0.0, 0.0]),
                        Point(m, [0.5, 0.0]), Point(m, [3.0, 0.0]), domain=dom)
