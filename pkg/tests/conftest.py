"""Shared fixtures and samplers for the test suite."""

import numpy as np
import pytest

from mtwkit import CostSpec, Point, make_cost

# (id, params) rows covering the whole catalog with generic parameters.
CATALOG = [
    ("quadratic", {}),
    ("perturbed_quadratic", {"f": {(2, 0): 0.05, (0, 2): 0.03}, "g": {(2, 0): 0.04, (1, 1): 0.02}}),
    ("sqrt", {}),
    ("log", {}),
    ("power", {"p": 4.0}),
    ("sphere_dist_sq", {}),
    ("reflector_antenna", {}),
]

EUCLIDEAN_IDS = ("quadratic", "perturbed_quadratic", "sqrt", "log", "power")


def build(cost_id, dim=2, params=None):
    row = dict(CATALOG)
    p = dict(row[cost_id]) if params is None else dict(params)
    return make_cost(CostSpec(cost_id, dim, p))


def sample_pair(cost, rng, spread=1.5):
    """One admissible, well-separated (x, y) pair for any catalog cost."""
    m = cost.manifold
    for _ in range(100):
        if m.kind == "euclidean":
            x = Point(m, rng.uniform(-1.0, 1.0, m.dim))
            y = Point(m, rng.uniform(-1.0, 1.0, m.dim) + spread * np.ones(m.dim))
        else:
            a = rng.normal(size=m.ambient_dim)
            b = rng.normal(size=m.ambient_dim)
            a /= np.linalg.norm(a)
            b /= np.linalg.norm(b)
            x, y = Point(m, a), Point(m, b)
            if float(np.arccos(np.clip(a @ b, -1, 1))) > np.pi - 0.2:
                continue
        if cost.admissible(x, y):
            return x, y
    raise RuntimeError("no admissible pair found")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
