"""The cost-sectional curvature and empirical A3W/A3S scanning.

The curvature of a cost at (x, y) against a pair of tangent vectors
(eta, xi) at x is the second t-derivative, at t = 0, of the scalar

    t  |->  [-D^2_xx c](x, c-Exp_x(p + t xi)) eta eta,       p = c-Exp_x^{-1}(y),

computed with a central second difference in t.  Orthogonal unit pairs
are what the A3W/A3S conditions quantify over; the scanner samples them
together with quasi-random (x, y) pairs and reports the worst value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import qmc

from ._parallel import parallel_map
from .costs import Cost
from .errors import MtwkitError
from .geometry import Point, TangentVector, from_frame, to_frame
from .transport import DomainSpec, c_exp, c_exp_inverse

DEFAULT_T_STEP = 1e-3


@dataclass
class CurvatureSample:
    x: Point
    y: Point
    eta: TangentVector
    xi: TangentVector
    value: float


@dataclass
class A3Report:
    cost_id: str
    n_samples: int
    n_skipped: int
    min_value: float
    argmin: Optional[dict]
    verdict: str  # "A3S-consistent" | "A3W-consistent" | "violated"
    c0_estimate: float
    tol: float
    margin: float
    seed: int
    values: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "cost_id": self.cost_id,
            "n_samples": self.n_samples,
            "n_skipped": self.n_skipped,
            "min_value": self.min_value,
            "argmin": self.argmin,
            "verdict": self.verdict,
            "c0_estimate": self.c0_estimate,
            "tol": self.tol,
            "margin": self.margin,
            "seed": self.seed,
        }


def c_sectional_curvature(
    cost: Cost,
    x: Point,
    y: Point,
    eta,
    xi,
    h_t: float = DEFAULT_T_STEP,
    richardson: bool = False,
) -> float:
    """Curvature against (eta, xi); bilinear-quadratic, not normalized."""
    eta_f = _frame_coords(x, eta)
    xi_f = _frame_coords(x, xi)
    p = to_frame(x, c_exp_inverse(cost, x, y).components)

    def s(t: float) -> float:
        if t == 0.0:
            y_t = y
        else:
            y_t = c_exp(cost, x, p + t * xi_f).target
        h = cost.d2xx(x, y_t)
        return -float(eta_f @ h @ eta_f)

    def second_diff(h: float) -> float:
        return (s(h) - 2.0 * s(0.0) + s(-h)) / h**2

    if richardson:
        return (4.0 * second_diff(h_t / 2.0) - second_diff(h_t)) / 3.0
    return second_diff(h_t)


def _frame_coords(x: Point, v) -> np.ndarray:
    if isinstance(v, TangentVector):
        return to_frame(x, v.components)
    return np.asarray(v, dtype=float)


def orthogonal_unit_pair(rng: np.random.Generator, n: int):
    """eta uniform on the unit sphere, xi uniform in its orthocomplement."""
    eta = rng.normal(size=n)
    eta /= np.linalg.norm(eta)
    while True:
        xi = rng.normal(size=n)
        xi -= (xi @ eta) * eta
        nrm = np.linalg.norm(xi)
        if nrm > 1e-12:
            return eta, xi / nrm


def sample_pairs(
    omega: DomainSpec,
    lam: DomainSpec,
    n_points: int,
    seed: int,
    admissible=None,
    max_tries: int = 8,
):
    """Quasi-random admissible (x, y) coordinate pairs, deterministic in seed.

    Boxes and full spaces use a scrambled Sobol sequence; sphere domains
    fall back to a seeded generator.
    """
    m_o, m_l = omega.manifold, lam.manifold
    use_sobol = omega.kind in ("box", "full_space") and lam.kind in ("box", "full_space")
    rng = np.random.default_rng(seed)
    pairs = []
    if use_sobol:
        n = m_o.dim
        lo_o, hi_o = _bounds(omega)
        lo_l, hi_l = _bounds(lam)
        sob = qmc.Sobol(d=2 * n, scramble=True, seed=seed)
        block_size = 1 << max(1, int(np.ceil(np.log2(n_points))))
        for _ in range(max_tries):
            block = sob.random(block_size)
            for row in block:
                x = Point(m_o, lo_o + row[:n] * (hi_o - lo_o))
                y = Point(m_l, lo_l + row[n:] * (hi_l - lo_l))
                if admissible is None or admissible(x, y):
                    pairs.append((x, y))
                    if len(pairs) == n_points:
                        return pairs
        return pairs
    for _ in range(max_tries * n_points):
        x = Point(m_o, omega.sample(rng, 1)[0])
        y = Point(m_l, lam.sample(rng, 1)[0])
        if admissible is None or admissible(x, y):
            pairs.append((x, y))
            if len(pairs) == n_points:
                break
    return pairs


def _bounds(dom: DomainSpec):
    if dom.kind == "box":
        return np.asarray(dom.low, dtype=float), np.asarray(dom.high, dtype=float)
    n = dom.manifold.dim
    return -dom.radius * np.ones(n), dom.radius * np.ones(n)


def scan_a3(
    cost: Cost,
    omega: DomainSpec,
    lam: DomainSpec,
    n_points: int,
    n_frames: int,
    tol: float = 1e-6,
    margin: float = 1e-4,
    seed: int = 0,
    h_t: float = DEFAULT_T_STEP,
) -> A3Report:
    """Grid-scan the curvature over orthogonal unit pairs and decide A3."""
    if n_points < 1 or n_frames < 1:
        raise ValueError("sampling budgets must be >= 1")
    pairs = sample_pairs(omega, lam, n_points, seed, admissible=cost.admissible)
    n = cost.manifold.dim
    frame_rng = np.random.default_rng(seed + 1)
    tasks = []
    for x, y in pairs:
        for _ in range(n_frames):
            eta, xi = orthogonal_unit_pair(frame_rng, n)
            tasks.append((x, y, eta, xi))

    def evaluate(task):
        x, y, eta, xi = task
        try:
            return c_sectional_curvature(cost, x, y, eta, xi, h_t=h_t)
        except MtwkitError:
            return None

    results = parallel_map(evaluate, tasks)
    values = []
    min_value = np.inf
    argmin = None
    skipped = 0
    for task, val in zip(tasks, results):
        if val is None:
            skipped += 1
            continue
        values.append(val)
        if val < min_value:
            min_value = val
            x, y, eta, xi = task
            argmin = {
                "x": x.coords.tolist(),
                "y": y.coords.tolist(),
                "eta": eta.tolist(),
                "xi": xi.tolist(),
                "value": val,
            }
    if not values:
        raise MtwkitError("A3 scan produced no evaluable samples")
    if min_value < -tol:
        verdict = "violated"
    elif min_value > margin:
        verdict = "A3S-consistent"
    else:
        verdict = "A3W-consistent"
    return A3Report(
        cost_id=cost.spec.id,
        n_samples=len(values),
        n_skipped=skipped,
        min_value=float(min_value),
        argmin=argmin,
        verdict=verdict,
        c0_estimate=float(min_value),
        tol=tol,
        margin=margin,
        seed=seed,
        values=values,
    )
