"""Discrete cost-convex potentials and the subdifferential comparison.

A potential here is a finite maximum of mountains,

    phi(x) = max_i [ -c(x, y_i) - v_i ],

which is the cost-Legendre transform of the finitely supported dual
function v.  Finite suprema keep both subdifferentials exactly
computable while exposing all crease phenomena: the cost-subdifferential
is the finite set of active mountain gradients, the ordinary
subdifferential is their convex hull, and the equality of the two (on
costs with nonnegative cost-sectional curvature) is what ``csis_check``
verifies by direct global support tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .costs import Cost
from .errors import MtwkitError, SingularPairError
from .geometry import Point
from .mountains import build_c_segment
from .report import INCONCLUSIVE, PASS, VIOLATED, VerificationReport
from .transport import DomainSpec, c_exp

ACTIVITY_TOL = 1e-9
HULL_FEAS_TOL = 1e-9


@dataclass
class DiscreteCPotential:
    """phi(x) = max_i [-c(x, y_i) - v_i] over a finite support."""

    cost: Cost
    support: list  # of (Point, float)
    domain: Optional[DomainSpec] = None

    def __post_init__(self):
        if not self.support:
            raise ValueError("potential needs at least one support mountain")

    @property
    def m(self) -> int:
        return len(self.support)

    def mountain(self, i: int, x: Point) -> float:
        y, v = self.support[i]
        return -self.cost.value(x, y) - v

    def value(self, x: Point) -> float:
        return max(self.mountain(i, x) for i in range(self.m))

    def admissible(self, x: Point) -> bool:
        return all(self.cost.admissible(x, y) for y, _ in self.support)

    def mountains_many(self, X: np.ndarray) -> np.ndarray:
        """Matrix of mountain values, shape (m, len(X)); X pre-filtered."""
        X = np.atleast_2d(X)
        rows = []
        for y, v in self.support:
            rows.append(-self.cost.value_many(X, y) - v)
        return np.array(rows)

    def values_many(self, X: np.ndarray) -> np.ndarray:
        return np.max(self.mountains_many(X), axis=0)

    def filter_admissible(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        mfd = self.cost.manifold
        keep = [self.admissible(Point(mfd, row)) for row in X]
        return X[np.array(keep, dtype=bool)]


def two_mountain_potential(cost: Cost, x_m: Point, y0: Point, y1: Point,
                           domain: Optional[DomainSpec] = None) -> DiscreteCPotential:
    """The pair of mountains normalized to touch zero at x_m.

    This is the potential whose crease through x_m carries the
    double-mountain inequality: a double-mountain violation at
    (x_m, y0, y1) is exactly a failed global support test here.
    """
    v0 = -cost.value(x_m, y0)
    v1 = -cost.value(x_m, y1)
    return DiscreteCPotential(cost, [(y0, v0), (y1, v1)], domain)


@dataclass
class ContactSet:
    x: Point
    active: list
    gaps: list  # phi(x) + v_i + c(x, y_i) per support index


@dataclass
class SubdiffSet:
    """Generators (frame coordinates at x) plus a hull membership test."""

    x: Point
    generators: np.ndarray  # shape (k, n)
    hull: bool  # True: membership means convex combination of generators

    def contains(self, p: np.ndarray, tol: float = HULL_FEAS_TOL) -> bool:
        p = np.asarray(p, dtype=float)
        G = np.atleast_2d(self.generators)
        if not self.hull:
            return bool(np.any(np.linalg.norm(G - p, axis=1) <= tol))
        return hull_membership(G, p, tol)


def hull_membership(generators: np.ndarray, p: np.ndarray, tol: float = HULL_FEAS_TOL) -> bool:
    """Is p a convex combination of the generator rows?

    Small-scale linear feasibility (k <= 32, n <= 4): find lambda >= 0
    with sum lambda = 1 and G^T lambda = p.
    """
    G = np.atleast_2d(np.asarray(generators, dtype=float))
    p = np.asarray(p, dtype=float)
    k = G.shape[0]
    if k == 1:
        return bool(np.linalg.norm(G[0] - p) <= tol)
    a_eq = np.vstack([G.T, np.ones((1, k))])
    b_eq = np.append(p, 1.0)
    res = linprog(np.zeros(k), A_eq=a_eq, b_eq=b_eq, bounds=(0.0, 1.0), method="highs")
    if res.status != 0:
        return False
    lam = res.x
    return bool(np.linalg.norm(G.T @ lam - p) <= max(tol, 1e-8))


def c_transform_eval(phi: DiscreteCPotential, x: Point) -> float:
    if not phi.admissible(x):
        raise SingularPairError("query point hits a singular pair of the support")
    return phi.value(x)


def c_star_transform(phi: DiscreteCPotential, y_points, x_grid: np.ndarray):
    """Dual transform values max_x [-c(x, y) - phi(x)] over an x-grid."""
    X = phi.filter_admissible(x_grid)
    if len(X) == 0:
        raise ValueError("x-grid contains no admissible points")
    phi_vals = phi.values_many(X)
    out = []
    for y in y_points:
        keep = np.array(
            [phi.cost.admissible(Point(phi.cost.manifold, row), y) for row in X]
        )
        if not np.any(keep):
            out.append((y, -np.inf))
            continue
        vals = -phi.cost.value_many(X[keep], y) - phi_vals[keep]
        out.append((y, float(np.max(vals))))
    return out


def contact_set(phi: DiscreteCPotential, x: Point, tol: float = ACTIVITY_TOL) -> ContactSet:
    """Indices of the mountains achieving the max at x, with their gaps."""
    fx = c_transform_eval(phi, x)
    scale = tol * (1.0 + abs(fx))
    active = []
    gaps = []
    for i, (y, v) in enumerate(phi.support):
        gap = fx + v + phi.cost.value(x, y)
        gaps.append(float(gap))
        if gap <= scale:
            active.append(i)
    return ContactSet(x, active, gaps)


def c_subdifferential(phi: DiscreteCPotential, x: Point, tol: float = ACTIVITY_TOL) -> SubdiffSet:
    """The finite set of active mountain gradients (no hull)."""
    cs = contact_set(phi, x, tol)
    gens = np.array([-phi.cost.grad_x(x, phi.support[i][0]) for i in cs.active])
    return SubdiffSet(x, gens, hull=False)


def subdifferential(phi: DiscreteCPotential, x: Point, tol: float = ACTIVITY_TOL) -> SubdiffSet:
    """Convex hull of the active mountain gradients."""
    cs = contact_set(phi, x, tol)
    gens = np.array([-phi.cost.grad_x(x, phi.support[i][0]) for i in cs.active])
    return SubdiffSet(x, gens, hull=True)


def support_margin(phi: DiscreteCPotential, x: Point, y: Point, z_grid: np.ndarray) -> float:
    """Worst violation of the global support inequality of the mountain y.

    Positive margin means some z has -c(z, y) + c(x, y) + phi(x) > phi(z):
    the mountain pinned to phi at x pokes above phi somewhere.
    """
    Z = phi.filter_admissible(z_grid)
    mfd = phi.cost.manifold
    keep = np.array([phi.cost.admissible(Point(mfd, row), y) for row in Z])
    Z = Z[keep]
    if len(Z) == 0:
        raise ValueError("no admissible grid points for the support test")
    pinned = -phi.cost.value_many(Z, y) + phi.cost.value(x, y) + phi.value(x)
    return float(np.max(pinned - phi.values_many(Z)))


def csis_check(
    phi: DiscreteCPotential,
    x_samples,
    z_grid: np.ndarray,
    n_hull_probes: int = 8,
    tol: float = 1e-7,
    seed: int = 0,
    activity_tol: float = ACTIVITY_TOL,
) -> VerificationReport:
    """Probe the hull of active gradients for globally supporting mountains.

    For each sampled x and each random convex combination p of active
    gradients, the candidate y = c-Exp_x(p) is tested for global support
    over the z-grid.  A failing probe exhibits a momentum in the ordinary
    subdifferential but not in the cost-subdifferential.
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    witnesses = []
    n_probes = 0
    n_inconclusive = 0
    for x in x_samples:
        cs = contact_set(phi, x, activity_tol)
        gens = np.array([-phi.cost.grad_x(x, phi.support[i][0]) for i in cs.active])
        if len(gens) == 1:
            combos = [np.array([1.0])]
        else:
            combos = [rng.dirichlet(np.ones(len(gens))) for _ in range(n_hull_probes)]
            combos.append(np.full(len(gens), 1.0 / len(gens)))
        for lam in combos:
            p = lam @ gens
            try:
                y = c_exp(phi.cost, x, p, domain=phi.domain).target
                margin = support_margin(phi, x, y, z_grid)
            except (MtwkitError, ValueError):
                n_inconclusive += 1
                continue
            n_probes += 1
            if margin > worst:
                worst = margin
            if margin > tol:
                witnesses.append(
                    {
                        "x": x.coords.tolist(),
                        "lambda": lam.tolist(),
                        "p": p.tolist(),
                        "y": y.coords.tolist(),
                        "margin": margin,
                    }
                )
    if n_probes == 0:
        verdict = INCONCLUSIVE
    elif witnesses:
        verdict = VIOLATED
    else:
        verdict = PASS
    return VerificationReport(
        check_id="csis",
        verdict=verdict,
        n_samples=n_probes,
        n_skipped=n_inconclusive,
        worst_margin=float(worst) if np.isfinite(worst) else 0.0,
        witnesses=witnesses,
        seed=seed,
    )


def default_x_grid(phi: DiscreteCPotential, per_axis: int = 64) -> np.ndarray:
    """Regular grid over the working box for dual-transform maximization."""
    if phi.domain is not None and phi.domain.kind == "box":
        lo = np.asarray(phi.domain.low, dtype=float)
        hi = np.asarray(phi.domain.high, dtype=float)
    else:
        n = phi.cost.manifold.dim
        lo, hi = -2.0 * np.ones(n), 2.0 * np.ones(n)
    axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def connectivity_check(
    phi: DiscreteCPotential,
    x: Point,
    n_theta: int = 33,
    tol: float = 1e-6,
    x_grid: Optional[np.ndarray] = None,
    activity_tol: float = ACTIVITY_TOL,
) -> VerificationReport:
    """Is the contact set at x connected along cost-segments?

    Every pair of contact mountains is joined by the segment through x;
    each node y_theta is tested for contact via the dual transform,
    phi(x) + c(x, y_theta) + v(y_theta) <= tol, with v obtained by grid
    maximization (the query x itself is in the grid, so the gap is
    nonnegative by construction).
    """
    cs = contact_set(phi, x, activity_tol)
    if len(cs.active) < 2:
        raise ValueError("contact set must have at least two mountains")
    if x_grid is None:
        x_grid = default_x_grid(phi)
    x_grid = np.vstack([x_grid, x.coords[None, :]])
    fx = phi.value(x)
    worst = 0.0
    witnesses = []
    n_nodes = 0
    for a in range(len(cs.active)):
        for b in range(a + 1, len(cs.active)):
            y_a = phi.support[cs.active[a]][0]
            y_b = phi.support[cs.active[b]][0]
            seg = build_c_segment(phi.cost, x, y_a, y_b, n_theta=n_theta,
                                  domain=phi.domain)
            duals = c_star_transform(phi, seg.points, x_grid)
            for theta, (y_t, v_t) in zip(seg.theta_grid, duals):
                gap = fx + phi.cost.value(x, y_t) + v_t
                n_nodes += 1
                if gap > worst:
                    worst = gap
                if gap > tol:
                    witnesses.append(
                        {
                            "pair": [cs.active[a], cs.active[b]],
                            "theta": float(theta),
                            "y_theta": y_t.coords.tolist(),
                            "gap": float(gap),
                        }
                    )
    verdict = PASS if not witnesses else VIOLATED
    return VerificationReport(
        check_id="connectivity",
        verdict=verdict,
        n_samples=n_nodes,
        worst_margin=float(worst),
        witnesses=witnesses,
    )


def crease_points(
    phi: DiscreteCPotential,
    i: int,
    j: int,
    box_low,
    box_high,
    n_points: int = 8,
    seed: int = 0,
    activity_tol: float = 1e-7,
    max_tries: int = 200,
):
    """Points where mountains i and j tie and jointly achieve the max.

    Bisects the difference of the two mountains along random chords of
    the box and keeps roots on which both mountains are active for phi.
    """
    rng = np.random.default_rng(seed)
    lo = np.asarray(box_low, dtype=float)
    hi = np.asarray(box_high, dtype=float)
    mfd = phi.cost.manifold
    out = []

    def diff(coords):
        p = Point(mfd, coords)
        return phi.mountain(i, p) - phi.mountain(j, p)

    for _ in range(max_tries):
        if len(out) >= n_points:
            break
        a = rng.uniform(lo, hi)
        b = rng.uniform(lo, hi)
        pa, pb = Point(mfd, a), Point(mfd, b)
        if not (phi.admissible(pa) and phi.admissible(pb)):
            continue
        try:
            fa, fb = diff(a), diff(b)
        except MtwkitError:
            continue
        if fa * fb >= 0:
            continue
        for _ in range(80):  # bisection to roundoff
            mid = 0.5 * (a + b)
            try:
                fm = diff(mid)
            except MtwkitError:
                break
            if fa * fm <= 0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        else:
            x = Point(mfd, 0.5 * (a + b))
            cs = contact_set(phi, x, activity_tol)
            if i in cs.active and j in cs.active:
                out.append(x)
    return out
