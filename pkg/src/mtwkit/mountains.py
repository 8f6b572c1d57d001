"""Cost-segments, sliding/double mountains, level-set fronts.

The sliding mountain of a segment {y_theta} built from a midpoint x_m is

    f_theta(x) = -c(x, y_theta) + c(x_m, y_theta),

normalized so that f and its first two theta-derivatives vanish at x_m.
This module provides the segment construction, the analytic
theta-derivatives via segment kinematics, the DASM and monotonicity
verifiers (two routes to the same verdict), the moving-front sampler and
ODE tracker, the expansion rate, and the fourth-order identity relating
the front-restricted second theta-derivative to the cost-sectional
curvature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .costs import Cost
from .curvature import c_sectional_curvature
from .errors import (
    MtwkitError,
    SegmentLeavesDomainError,
    UnreachableError,
    VanishingGradientError,
    TrajectoryLeftDomainError,
)
from .geometry import Point, chart_log, move, to_frame
from .report import PASS, VIOLATED, VerificationReport
from .transport import (
    DomainSpec,
    c_exp,
    c_exp_inverse,
    cstar_exp,
    cstar_exp_inverse,
)

# Costs whose momentum space excludes the origin; a straight momentum
# segment through 0 degenerates and is bypassed by a small orthogonal
# offset of the whole segment.
_PUNCTURED_MOMENTUM = ("log", "power", "reflector_antenna")
COLLINEAR_OFFSET = 1e-6


@dataclass
class SegmentKinematics:
    theta: float
    y: Point
    ydot: np.ndarray  # frame coords at y
    yddot: np.ndarray
    residual: float


@dataclass
class CSegment:
    cost: Cost
    x_m: Point
    y0: Point
    y1: Point
    p0: np.ndarray  # frame coords at x_m
    p1: np.ndarray
    theta_grid: np.ndarray
    points: list
    perturbed: bool = False

    def p_at(self, theta: float) -> np.ndarray:
        return (1.0 - theta) * self.p0 + theta * self.p1

    def point_at(self, theta: float) -> Point:
        # Grid nodes are precomputed; off-grid thetas solved on demand.
        idx = np.nonzero(np.isclose(self.theta_grid, theta, atol=1e-15))[0]
        if idx.size:
            return self.points[int(idx[0])]
        return c_exp(self.cost, self.x_m, self.p_at(theta)).target

    def kinematics(self, theta: float) -> SegmentKinematics:
        y = self.point_at(theta)
        m = self.cost.d2xy(self.x_m, y)
        dp = self.p1 - self.p0
        ydot = np.linalg.solve(m, -dp)
        t3 = self.cost.d3_x_yy(self.x_m, y)
        rhs = -np.einsum("kij,i,j->k", t3, ydot, ydot)
        yddot = np.linalg.solve(m, rhs)
        res = max(
            float(np.linalg.norm(m @ ydot + dp)),
            float(np.linalg.norm(m @ yddot - rhs)),
        )
        return SegmentKinematics(theta, y, ydot, yddot, res)


def build_c_segment(
    cost: Cost,
    x_m: Point,
    y0: Point,
    y1: Point,
    n_theta: int = 101,
    domain: Optional[DomainSpec] = None,
) -> CSegment:
    """Construct the segment {y_theta} with respect to x_m, on a theta grid."""
    if y0.close_to(y1, tol=1e-14):
        raise ValueError("segment endpoints must differ")
    p0 = to_frame(x_m, c_exp_inverse(cost, x_m, y0).components)
    p1 = to_frame(x_m, c_exp_inverse(cost, x_m, y1).components)
    perturbed = False
    if cost.spec.id in _PUNCTURED_MOMENTUM:
        dist = _segment_origin_distance(p0, p1)
        if dist < COLLINEAR_OFFSET:
            offset = _orthogonal_offset(p0, p1) * COLLINEAR_OFFSET
            p0 = p0 + offset
            p1 = p1 + offset
            y0 = c_exp(cost, x_m, p0).target
            y1 = c_exp(cost, x_m, p1).target
            perturbed = True
    grid = np.linspace(0.0, 1.0, n_theta)
    points = []
    for theta in grid:
        p = (1.0 - theta) * p0 + theta * p1
        try:
            res = c_exp(cost, x_m, p, domain=domain)
        except MtwkitError as exc:
            raise SegmentLeavesDomainError(
                f"segment node unresolvable at theta={theta:.6f}: {exc}", theta=theta
            ) from exc
        points.append(res.target)
    seg = CSegment(cost, x_m, y0, y1, p0, p1, grid, points, perturbed)
    _check_segment(seg)
    return seg


def _segment_origin_distance(p0: np.ndarray, p1: np.ndarray) -> float:
    d = p1 - p0
    dd = float(d @ d)
    if dd == 0.0:
        return float(np.linalg.norm(p0))
    t = float(np.clip(-(p0 @ d) / dd, 0.0, 1.0))
    return float(np.linalg.norm(p0 + t * d))


def _orthogonal_offset(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    d = p1 - p0
    nd = np.linalg.norm(d)
    if nd == 0.0:
        d = np.zeros_like(p0)
        d[0] = 1.0
        nd = 1.0
    d = d / nd
    for k in range(len(d)):
        e = np.zeros_like(d)
        e[k] = 1.0
        v = e - (e @ d) * d
        nrm = np.linalg.norm(v)
        if nrm > 0.5:
            return v / nrm
    raise AssertionError("no orthogonal direction found")


def _check_segment(seg: CSegment) -> None:
    # Nonvanishing speed at every node; A2 guarantees this in theory.
    for theta in seg.theta_grid:
        kin = seg.kinematics(float(theta))
        if float(np.linalg.norm(kin.ydot)) <= 1e-8:
            raise SegmentLeavesDomainError(
                f"segment speed vanished at theta={theta:.6f}", theta=float(theta)
            )


class MountainField:
    """Sliding mountain of a segment, with theta-derivatives.

    The derivatives come from the closed-form expressions in terms of the
    segment kinematics; ``fd_theta_derivs`` gives the independent
    finite-difference route for cross-checking.
    """

    def __init__(self, cost: Cost, segment: CSegment):
        self.cost = cost
        self.segment = segment
        self._kin_cache: dict = {}

    def kinematics(self, theta: float) -> SegmentKinematics:
        key = round(float(theta), 15)
        if key not in self._kin_cache:
            self._kin_cache[key] = self.segment.kinematics(theta)
        return self._kin_cache[key]

    def f(self, theta: float, x: Point) -> float:
        y = self.kinematics(theta).y
        return -self.cost.value(x, y) + self.cost.value(self.segment.x_m, y)

    def f_many(self, theta: float, X: np.ndarray) -> np.ndarray:
        y = self.kinematics(theta).y
        base = self.cost.value(self.segment.x_m, y)
        return -self.cost.value_many(X, y) + base

    def df_dtheta(self, theta: float, x: Point) -> float:
        kin = self.kinematics(theta)
        gm = self.cost.grad_y(self.segment.x_m, kin.y)
        gx = self.cost.grad_y(x, kin.y)
        return float((gm - gx) @ kin.ydot)

    def df_many(self, theta: float, X: np.ndarray) -> np.ndarray:
        kin = self.kinematics(theta)
        gm = self.cost.grad_y(self.segment.x_m, kin.y)
        G = self.cost.grad_y_many(X, kin.y)
        return (gm[None, :] - G) @ kin.ydot

    def d2f_dtheta2(self, theta: float, x: Point) -> float:
        kin = self.kinematics(theta)
        hm = self.cost.d2yy(self.segment.x_m, kin.y)
        hx = self.cost.d2yy(x, kin.y)
        gm = self.cost.grad_y(self.segment.x_m, kin.y)
        gx = self.cost.grad_y(x, kin.y)
        quad = float(kin.ydot @ (hm - hx) @ kin.ydot)
        lin = float((gm - gx) @ kin.yddot)
        return quad + lin

    def d2f_many(self, theta: float, X: np.ndarray) -> np.ndarray:
        kin = self.kinematics(theta)
        hm = self.cost.d2yy(self.segment.x_m, kin.y)
        HX = self.cost.d2yy_many(X, kin.y)
        gm = self.cost.grad_y(self.segment.x_m, kin.y)
        G = self.cost.grad_y_many(X, kin.y)
        quad = np.einsum("i,kij,j->k", kin.ydot, hm[None, :, :] - HX, kin.ydot)
        lin = (gm[None, :] - G) @ kin.yddot
        return quad + lin

    def derivs(self, theta: float, x: Point):
        return (self.f(theta, x), self.df_dtheta(theta, x), self.d2f_dtheta2(theta, x))

    def grad_x_df(self, theta: float, x: Point) -> np.ndarray:
        """Gradient in x of the first theta-derivative (frame at x)."""
        kin = self.kinematics(theta)
        return -self.cost.d2xy(x, kin.y) @ kin.ydot

    def grad_x_d2f(self, theta: float, x: Point) -> np.ndarray:
        kin = self.kinematics(theta)
        t3 = self.cost.d3_x_yy(x, kin.y)
        quad = -np.einsum("kij,i,j->k", t3, kin.ydot, kin.ydot)
        lin = -self.cost.d2xy(x, kin.y) @ kin.yddot
        return quad + lin

    def fd_theta_derivs(self, theta: float, x: Point, h: float = 1e-4):
        """(df/dtheta, d2f/dtheta2) by centered differences in theta."""
        fm = self.f(theta - h, x)
        f0 = self.f(theta, x)
        fp = self.f(theta + h, x)
        return ((fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h**2)


def sliding_mountain_derivs(field: MountainField, theta: float, x: Point):
    return field.derivs(theta, x)


def _filter_admissible(cost: Cost, seg: CSegment, X: np.ndarray):
    """Drop x-samples that meet the singular set of any segment node."""
    X = np.atleast_2d(X)
    keep = np.ones(len(X), dtype=bool)
    m = cost.manifold
    for y in seg.points:
        for i, row in enumerate(X):
            if keep[i] and not cost.admissible(Point(m, row), y):
                keep[i] = False
    return X[keep], int(np.sum(~keep))


def _refine_peaks(cost: Cost, seg: CSegment, X: np.ndarray, F: np.ndarray,
                  min_before: np.ndarray, min_after: np.ndarray):
    """Golden-section sharpening of per-sample peaks between grid nodes.

    A hump whose peak falls strictly inside a grid cell can be invisible
    in the node values (the classic case: values rising all the way into
    an endpoint whose slope has already turned negative), so every
    candidate peak cell is re-maximized along theta using cost values
    only, keeping this route independent of the derivative-based one.
    Returns the best refined margin and its witness, or (None, None).
    """
    m = cost.manifold
    grid = seg.theta_grid
    n = len(grid)
    best = None
    witness = None
    for ix, row in enumerate(X):
        x = Point(m, row)

        def neg_f(t):
            y = seg.point_at(float(t))
            return cost.value(x, y) - cost.value(seg.x_m, y)

        col = F[:, ix]
        cells = []
        if col[-1] >= col[-2]:
            cells.append((grid[-2], grid[-1]))
        if col[0] >= col[1]:
            cells.append((grid[0], grid[1]))
        interior = np.nonzero((col[1:-1] >= col[:-2]) & (col[1:-1] >= col[2:]))[0] + 1
        cells.extend((grid[i - 1], grid[i + 1]) for i in interior)
        for lo, hi in cells:
            try:
                res = minimize_scalar(neg_f, bounds=(float(lo), float(hi)),
                                      method="bounded", options={"xatol": 1e-6})
            except MtwkitError:
                continue
            th = float(res.x)
            k = int(np.searchsorted(grid, th))
            if k <= 0 or k >= n:
                continue
            margin = float(-res.fun - max(min_before[k - 1, ix], min_after[k, ix]))
            if best is None or margin > best:
                best = margin
                witness = {"theta": th, "x": np.asarray(row).tolist(), "margin": margin}
    return best, witness


def dasm_check(
    cost: Cost,
    x_m: Point,
    y0: Point,
    y1: Point,
    x_samples: np.ndarray,
    theta_grid=None,
    tol: float = 1e-7,
    strict: bool = False,
    domain: Optional[DomainSpec] = None,
    seg: Optional[CSegment] = None,
) -> VerificationReport:
    """Check the double-mountain inequality over sampled (theta, x).

    The inequality quantifies over every c-segment, and each sub-segment
    of the built grid is one, so for every interior node we compare
    f_theta against the tightest double mountain max[f_a, f_b] over
    enclosing node pairs a < theta < b (via running minima).  This is
    what makes the verdict agree with the monotonicity route even on
    configurations whose endpoint double mountain hides an interior hump.
    """
    if seg is None:
        n_theta = 101 if theta_grid is None else len(theta_grid)
        seg = build_c_segment(cost, x_m, y0, y1, n_theta=n_theta, domain=domain)
    field = MountainField(cost, seg)
    X, skipped = _filter_admissible(cost, seg, x_samples)
    if len(X) == 0:
        return VerificationReport("dasm", "inconclusive", 0, skipped, 0.0)
    F = np.array([field.f_many(float(t), X) for t in seg.theta_grid])
    min_before = np.minimum.accumulate(F, axis=0)
    min_after = np.minimum.accumulate(F[::-1], axis=0)[::-1]
    margins = F[1:-1] - np.maximum(min_before[:-2], min_after[2:])
    worst = float(np.max(margins))
    it, ix = np.unravel_index(int(np.argmax(margins)), margins.shape)
    witness = {
        "theta": float(seg.theta_grid[it + 1]),
        "x": X[ix].tolist(),
        "margin": worst,
    }
    if worst <= tol:
        refined, ref_witness = _refine_peaks(cost, seg, X, F, min_before, min_after)
        if refined is not None and refined > worst:
            worst = refined
            witness = ref_witness
    verdict = PASS if worst <= tol else VIOLATED
    details = {"strict": strict, "perturbed_segment": seg.perturbed}
    if strict:
        dist = np.linalg.norm(X - x_m.coords, axis=1)
        away = dist > 1e-6
        if np.any(away):
            worst_strict = float(np.max(margins[:, away]))
            details["worst_strict_margin"] = worst_strict
            if worst_strict >= 0.0:
                verdict = VIOLATED
    return VerificationReport(
        check_id="dasm",
        verdict=verdict,
        n_samples=int(margins.size),
        n_skipped=skipped,
        worst_margin=worst,
        witnesses=[witness] if verdict == VIOLATED else [],
        details=details,
    )


def monotonicity_check(
    cost: Cost,
    x_m: Point,
    y0: Point,
    y1: Point,
    x_samples: np.ndarray,
    theta_grid=None,
    tol_pos: float = 1e-7,
    tol_neg: float = 1e-6,
    strict: bool = False,
    domain: Optional[DomainSpec] = None,
    seg: Optional[CSegment] = None,
) -> VerificationReport:
    """Check that the super-level sets of df/dtheta only grow with theta."""
    if seg is None:
        n_theta = 101 if theta_grid is None else len(theta_grid)
        seg = build_c_segment(cost, x_m, y0, y1, n_theta=n_theta, domain=domain)
    field = MountainField(cost, seg)
    X, skipped = _filter_admissible(cost, seg, x_samples)
    if len(X) == 0:
        return VerificationReport("monotonicity", "inconclusive", 0, skipped, 0.0)
    G = np.array([field.df_many(float(t), X) for t in seg.theta_grid])
    worst_drop = np.inf
    witness = None
    n_crossing_violations = 0
    for ix in range(G.shape[1]):
        g = G[:, ix]
        entered = np.nonzero(g >= tol_pos)[0]
        if entered.size == 0:
            continue
        first = int(entered[0])
        tail_min = float(np.min(g[first:]))
        if tail_min < worst_drop:
            worst_drop = tail_min
            it = first + int(np.argmin(g[first:]))
            witness = {
                "theta_entry": float(seg.theta_grid[first]),
                "theta_drop": float(seg.theta_grid[it]),
                "x": X[ix].tolist(),
                "drop": tail_min,
            }
        if strict:
            signs = np.sign(np.where(np.abs(g) < tol_pos, 0.0, g))
            nz = signs[signs != 0.0]
            changes = int(np.sum(nz[1:] != nz[:-1]))
            if changes >= 2 and np.linalg.norm(X[ix] - x_m.coords) > 1e-6:
                n_crossing_violations += 1
    if not np.isfinite(worst_drop):
        worst_drop = 0.0
    verdict = PASS if worst_drop >= -tol_neg else VIOLATED
    details = {"strict": strict, "perturbed_segment": seg.perturbed}
    if strict:
        details["n_double_crossings"] = n_crossing_violations
        if n_crossing_violations:
            verdict = VIOLATED
    return VerificationReport(
        check_id="monotonicity",
        verdict=verdict,
        n_samples=int(G.size),
        n_skipped=skipped,
        worst_margin=float(worst_drop),
        witnesses=[witness] if (witness is not None and verdict == VIOLATED) else [],
        details=details,
    )


# ---------------------------------------------------------------------------
# Level-set fronts
# ---------------------------------------------------------------------------


@dataclass
class FrontSample:
    theta: float
    w: np.ndarray  # coefficients in the basis of the orthocomplement of ydot
    x_w: Optional[Point]
    p_dot: Optional[np.ndarray]  # frame coords at x_w
    reachable: bool
    df_residual: float = np.nan


def w_basis(field: MountainField, theta: float) -> np.ndarray:
    """Orthonormal rows spanning the orthocomplement of ydot at y_theta."""
    kin = field.kinematics(theta)
    n = len(kin.ydot)
    d = kin.ydot / np.linalg.norm(kin.ydot)
    rows = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        v = e - (e @ d) * d
        for r in rows:
            v = v - (v @ r) * r
        nrm = np.linalg.norm(v)
        if nrm > 1e-6:
            rows.append(v / nrm)
        if len(rows) == n - 1:
            break
    return np.array(rows) if rows else np.zeros((0, n))


def front_sample(
    cost: Cost,
    seg: CSegment,
    theta: float,
    w_grid,
    domain: Optional[DomainSpec] = None,
    n_probes: int = 16,
) -> list:
    """Sample the zero level set S_theta of df/dtheta.

    Each coefficient vector w is mapped through the dual exponential at
    y_theta; a sample counts as reachable only when the whole straight
    momentum ray from q_theta to q_theta + w resolves (probed at
    ``n_probes`` interior points), matching the weakened convexity
    condition for punctured momentum domains.
    """
    field = MountainField(cost, seg)
    kin = field.kinematics(theta)
    q = to_frame(kin.y, cstar_exp_inverse(cost, seg.x_m, kin.y).components)
    B = w_basis(field, theta)
    out = []
    for wc in w_grid:
        wc = np.asarray(wc, dtype=float)
        w_vec = B.T @ wc
        reachable = True
        x_w = None
        for t in np.linspace(1.0 / n_probes, 1.0, n_probes):
            try:
                res = cstar_exp(cost, kin.y, q + t * w_vec, domain=domain)
            except MtwkitError:
                reachable = False
                break
            x_w = res.target
        if not reachable or x_w is None:
            out.append(FrontSample(theta, wc, None, None, False))
            continue
        p_dot = -cost.d2xy(x_w, kin.y) @ kin.ydot
        resid = abs(field.df_dtheta(theta, x_w))
        out.append(FrontSample(theta, wc, x_w, p_dot, True, resid))
    return out


def front_point(
    cost: Cost,
    seg: CSegment,
    theta: float,
    w_coeffs,
    domain: Optional[DomainSpec] = None,
    n_probes: int = 16,
):
    """Single reachable front sample, or raise UnreachableError."""
    [sample] = front_sample(cost, seg, theta, [w_coeffs], domain=domain, n_probes=n_probes)
    if not sample.reachable:
        raise UnreachableError(f"front sample unreachable at theta={theta}, w={w_coeffs}")
    return sample


def dw_x(
    cost: Cost,
    seg: CSegment,
    theta: float,
    w_coeffs: np.ndarray,
    eta_coeffs: np.ndarray,
    h: float = 1e-3,
    domain: Optional[DomainSpec] = None,
):
    """Directional derivative of w -> x_w, in the frame at x_w."""
    w_coeffs = np.asarray(w_coeffs, dtype=float)
    eta_coeffs = np.asarray(eta_coeffs, dtype=float)
    center = front_point(cost, seg, theta, w_coeffs, domain=domain)
    plus = front_point(cost, seg, theta, w_coeffs + h * eta_coeffs, domain=domain)
    minus = front_point(cost, seg, theta, w_coeffs - h * eta_coeffs, domain=domain)
    a = chart_log(center.x_w, plus.x_w)
    b = chart_log(center.x_w, minus.x_w)
    return center, (a - b) / (2.0 * h)


def expansion_rate(cost: Cost, seg: CSegment, theta: float, x_w: Point) -> float:
    """Normal speed of the super-level set along the front at x_w."""
    field = MountainField(cost, seg)
    grad = field.grad_x_df(theta, x_w)
    nrm = float(np.linalg.norm(grad))
    if nrm < 1e-12:
        raise VanishingGradientError(
            "level-set gradient vanished; A2 should prevent this"
        )
    return field.d2f_dtheta2(theta, x_w) / nrm


def front_ode_track(
    cost: Cost,
    seg: CSegment,
    x0: Point,
    t_span=(0.0, 1.0),
    dt: float = 1e-2,
    domain: Optional[DomainSpec] = None,
    g_tol: float = 1e-6,
) -> list:
    """Track a front point through theta by the level-set ODE (RK4).

    Returns the list of visited points, one per step (including both
    endpoints).  The defining constraint df/dtheta = 0 is monitored along
    the way.
    """
    field = MountainField(cost, seg)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if abs(field.df_dtheta(t0, x0)) > 1e-8:
        raise ValueError("starting point is not on the initial front")

    def velocity(t: float, x: Point) -> np.ndarray:
        grad = field.grad_x_df(t, x)
        nrm2 = float(grad @ grad)
        if nrm2 < 1e-24:
            raise VanishingGradientError("level-set gradient vanished on trajectory")
        return -(field.d2f_dtheta2(t, x) / nrm2) * grad

    n_steps = max(1, int(round(abs(t1 - t0) / dt)))
    h = (t1 - t0) / n_steps
    x = x0
    trajectory = [x]
    t = t0
    for _ in range(n_steps):
        k1 = velocity(t, x)
        k2 = velocity(t + h / 2.0, move(x, (h / 2.0) * k1))
        k3 = velocity(t + h / 2.0, move(x, (h / 2.0) * k2))
        k4 = velocity(t + h, move(x, h * k3))
        x = move(x, (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        t += h
        if domain is not None and not domain.contains(x):
            raise TrajectoryLeftDomainError(f"trajectory left the domain at t={t:.6f}")
        if abs(field.df_dtheta(t, x)) > g_tol:
            raise TrajectoryLeftDomainError(
                f"trajectory drifted off the front at t={t:.6f}"
            )
        trajectory.append(x)
    return trajectory


def lemma62_check(
    cost: Cost,
    seg: CSegment,
    theta: float,
    w_coeffs,
    eta_coeffs,
    h_w: float = 1e-3,
    h_t: float = 1e-3,
    domain: Optional[DomainSpec] = None,
):
    """Compare the front-restricted second theta-derivative curvature.

    lhs: second difference along w of w -> d^2f/dtheta^2 (x_w).
    rhs: cost-sectional curvature at (x_w, y_theta) against the raw
    (non-normalized) pair (D_w x_w, p_dot).  Returns (lhs, rhs, residual)
    with residual relative to 1 + |rhs|.
    """
    field = MountainField(cost, seg)
    w_coeffs = np.asarray(w_coeffs, dtype=float)
    eta_coeffs = np.asarray(eta_coeffs, dtype=float)
    center = front_point(cost, seg, theta, w_coeffs, domain=domain)
    plus = front_point(cost, seg, theta, w_coeffs + h_w * eta_coeffs, domain=domain)
    minus = front_point(cost, seg, theta, w_coeffs - h_w * eta_coeffs, domain=domain)
    f0 = field.d2f_dtheta2(theta, center.x_w)
    fp = field.d2f_dtheta2(theta, plus.x_w)
    fm = field.d2f_dtheta2(theta, minus.x_w)
    lhs = (fp - 2.0 * f0 + fm) / h_w**2
    a = chart_log(center.x_w, plus.x_w)
    b = chart_log(center.x_w, minus.x_w)
    dwx = (a - b) / (2.0 * h_w)
    rhs = c_sectional_curvature(cost, center.x_w, field.kinematics(theta).y, dwx, center.p_dot, h_t=h_t)
    residual = abs(lhs - rhs) / (1.0 + abs(rhs))
    return lhs, rhs, residual


def positivity_check(
    cost: Cost,
    seg: CSegment,
    theta_grid,
    w_grid,
    tol: float = 1e-8,
    strict: bool = False,
    strict_margin: float = 1e-8,
    domain: Optional[DomainSpec] = None,
) -> VerificationReport:
    """Verify d^2f/dtheta^2 >= 0 on the sampled fronts.

    Also checks that the x-gradient of d^2f/dtheta^2 vanishes at x_m (a
    structural identity of the construction).
    """
    field = MountainField(cost, seg)
    min_value = np.inf
    min_strict = np.inf
    worst_grad = 0.0
    witness = None
    n_samples = 0
    n_skipped = 0
    for theta in theta_grid:
        theta = float(theta)
        samples = front_sample(cost, seg, theta, w_grid, domain=domain)
        worst_grad = max(
            worst_grad, float(np.linalg.norm(field.grad_x_d2f(theta, seg.x_m)))
        )
        for s in samples:
            if not s.reachable:
                n_skipped += 1
                continue
            val = field.d2f_dtheta2(theta, s.x_w)
            n_samples += 1
            if val < min_value:
                min_value = val
                witness = {
                    "theta": theta,
                    "w": s.w.tolist(),
                    "x_w": s.x_w.coords.tolist(),
                    "value": val,
                }
            if float(np.linalg.norm(s.w)) > 1e-9:
                min_strict = min(min_strict, val)
    verdict = PASS if (n_samples and min_value >= -tol) else VIOLATED
    if strict and np.isfinite(min_strict) and min_strict <= strict_margin:
        verdict = VIOLATED
    details = {
        "min_value": float(min_value) if n_samples else None,
        "min_strict_value": float(min_strict) if np.isfinite(min_strict) else None,
        "grad_at_xm": worst_grad,
        "strict": strict,
    }
    return VerificationReport(
        check_id="positivity",
        verdict=verdict,
        n_samples=n_samples,
        n_skipped=n_skipped,
        worst_margin=float(min_value) if n_samples else 0.0,
        witnesses=[witness] if (witness and verdict == VIOLATED) else [],
        details=details,
    )
