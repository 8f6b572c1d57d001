"""Manifold primitives: frames, exponential/log round trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtwkit import Point, TangentVector, euclidean, sphere
from mtwkit.errors import AntipodalError, BaseMismatchError, CutLocusError
from mtwkit.geometry import (
    chart_log,
    distance,
    exp_map,
    frame_matrix,
    from_frame,
    log_map,
    move,
    orthonormal_frame,
    project_tangent,
    to_frame,
)

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


def _sphere_point(raw):
    v = np.asarray(raw, dtype=float) + np.array([0.1, 0.2, 0.3])
    return Point(sphere(2), v / np.linalg.norm(v))


@given(st.tuples(finite, finite, finite), st.tuples(finite, finite))
@settings(max_examples=100, deadline=None)
def test_sphere_exp_log_round_trip(raw_x, coeffs):
    x = _sphere_point(raw_x)
    v = np.asarray(coeffs, dtype=float)
    y = move(x, v)
    back = chart_log(x, y)
    assert np.allclose(back, v, atol=1e-10)


@given(st.tuples(finite, finite, finite), st.tuples(finite, finite, finite))
@settings(max_examples=50, deadline=None)
def test_sphere_log_exp_round_trip(raw_x, raw_y):
    m = sphere(2)
    x, y = _sphere_point(raw_x), _sphere_point(raw_y)
    if distance(m, x, y) > np.pi - 0.1:
        return
    v = log_map(m, x, y)
    z = exp_map(m, x, v)
    assert np.allclose(z.coords, y.coords, atol=1e-12)
    assert abs(v.norm - distance(m, x, y)) < 1e-12


@given(st.tuples(finite, finite), st.tuples(finite, finite))
@settings(max_examples=50, deadline=None)
def test_euclidean_exp_log(raw_x, raw_v):
    m = euclidean(2)
    x = Point(m, np.asarray(raw_x, dtype=float))
    v = np.asarray(raw_v, dtype=float)
    y = move(x, v)
    assert np.allclose(y.coords, x.coords + v)
    assert np.allclose(chart_log(x, y), v)


def test_frame_orthonormal_on_sphere(rng):
    for _ in range(20):
        a = rng.normal(size=4)
        x = Point(sphere(3), a / np.linalg.norm(a))
        F = frame_matrix(x)
        assert F.shape == (3, 4)
        assert np.allclose(F @ F.T, np.eye(3), atol=1e-12)
        assert np.allclose(F @ x.coords, 0.0, atol=1e-12)


def test_frame_round_trip(rng):
    a = rng.normal(size=3)
    x = Point(sphere(2), a / np.linalg.norm(a))
    w = rng.normal(size=2)
    assert np.allclose(to_frame(x, from_frame(x, w)), w, atol=1e-14)


def test_project_tangent_idempotent(rng):
    a = rng.normal(size=3)
    x = Point(sphere(2), a / np.linalg.norm(a))
    v = project_tangent(x, rng.normal(size=3))
    assert abs(float(v.components @ x.coords)) < 1e-12
    v2 = project_tangent(x, v.components)
    assert np.allclose(v.components, v2.components)


def test_orthonormal_frame_vectors(rng):
    m = sphere(2)
    a = rng.normal(size=3)
    x = Point(m, a / np.linalg.norm(a))
    frame = orthonormal_frame(m, x)
    assert len(frame) == 2
    for v in frame:
        assert isinstance(v, TangentVector)
        assert abs(v.norm - 1.0) < 1e-12


def test_cut_locus_and_antipodal_rejected():
    m = sphere(2)
    x = Point(m, [1.0, 0.0, 0.0])
    with pytest.raises(CutLocusError):
        exp_map(m, x, TangentVector(x, [0.0, np.pi + 0.01, 0.0]))
    y = Point(m, [-1.0, 0.0, 0.0])
    with pytest.raises(AntipodalError):
        log_map(m, x, y)


def test_base_mismatch_rejected():
    m = euclidean(2)
    x = Point(m, [0.0, 0.0])
    z = Point(m, [1.0, 0.0])
    v = TangentVector(x, [1.0, 0.0])
    with pytest.raises(BaseMismatchError):
        exp_map(m, z, v)


def test_invalid_points_rejected():
    with pytest.raises(ValueError):
        Point(sphere(2), [1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        TangentVector(Point(sphere(2), [1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
