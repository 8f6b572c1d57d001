"""Cost-exponential maps and their inverses.

``c_exp`` solves p = -grad_x c(x, y) for y, using a closed form where the
catalog provides one and a damped Newton iteration with the mixed Hessian
as Jacobian otherwise.  All momenta are handled in frame coordinates at
their base point; the public API accepts and returns TangentVectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .costs import Cost
from .errors import (
    NewtonDivergedError,
    OutsideDomainError,
    SingularJacobianError,
)
from .geometry import (
    Manifold,
    Point,
    TangentVector,
    from_frame,
    move,
    to_frame,
)

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-12
SUCCESS_RESIDUAL = 1e-10


@dataclass
class CExpResult:
    target: Point
    iterations: int
    residual: float


@dataclass(frozen=True)
class DomainSpec:
    """A sampling/membership domain on one side of the cost.

    Shapes: ``box`` (low/high), ``full_space`` (working radius for
    sampling only), ``full_sphere``, ``sphere_cap`` (center direction and
    angular radius).
    """

    manifold: Manifold
    kind: str
    low: Optional[tuple] = None
    high: Optional[tuple] = None
    radius: float = 2.0
    center: Optional[tuple] = None
    angle: float = np.pi / 2

    def __post_init__(self):
        if self.kind not in ("box", "full_space", "full_sphere", "sphere_cap"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "box":
            lo = np.asarray(self.low, dtype=float)
            hi = np.asarray(self.high, dtype=float)
            if lo.shape != hi.shape or np.any(hi <= lo):
                raise ValueError("box domain must have nonempty interior")

    def contains(self, x: Point, tol: float = 1e-9) -> bool:
        c = x.coords
        if self.kind == "box":
            return bool(
                np.all(c >= np.asarray(self.low) - tol)
                and np.all(c <= np.asarray(self.high) + tol)
            )
        if self.kind in ("full_space", "full_sphere"):
            return True
        cos_a = float(np.asarray(self.center) @ c) / max(np.linalg.norm(c), 1e-300)
        return float(np.arccos(np.clip(cos_a, -1.0, 1.0))) <= self.angle + tol

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        """k quasi-uniform ambient coordinate rows inside the domain."""
        if self.kind == "box":
            lo = np.asarray(self.low, dtype=float)
            hi = np.asarray(self.high, dtype=float)
            return rng.uniform(lo, hi, size=(k, len(lo)))
        if self.kind == "full_space":
            n = self.manifold.dim
            return rng.uniform(-self.radius, self.radius, size=(k, n))
        d = self.manifold.ambient_dim
        pts = rng.normal(size=(k, d))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        if self.kind == "full_sphere":
            return pts
        center = np.asarray(self.center, dtype=float)
        center = center / np.linalg.norm(center)
        out = []
        while len(out) < k:
            cand = rng.normal(size=d)
            cand /= np.linalg.norm(cand)
            ang = np.arccos(np.clip(cand @ center, -1.0, 1.0))
            if ang <= self.angle:
                out.append(cand)
        return np.array(out)


def box(manifold: Manifold, low, high) -> DomainSpec:
    return DomainSpec(manifold, "box", low=tuple(low), high=tuple(high))


def _as_frame(x: Point, p) -> np.ndarray:
    if isinstance(p, TangentVector):
        return to_frame(x, p.components)
    return np.asarray(p, dtype=float)


def _newton(cost: Cost, x: Point, p: np.ndarray, y0: Point, tol: float, max_iter: int):
    """Damped Newton for F(y) = p + grad_x c(x, y) = 0, y on the manifold."""
    y = y0
    fval = p + cost.grad_x(x, y)
    res = float(np.linalg.norm(fval))
    for it in range(1, max_iter + 1):
        if res < tol:
            return y, it - 1, res
        jac = cost.d2xy(x, y)
        try:
            delta = np.linalg.solve(jac, -fval)
        except np.linalg.LinAlgError:
            raise SingularJacobianError("mixed Hessian singular during Newton")
        if not np.all(np.isfinite(delta)):
            raise SingularJacobianError("mixed Hessian produced non-finite step")
        alpha = 1.0
        for _ in range(25):
            try:
                y_new = move(y, alpha * delta)
                f_new = p + cost.grad_x(x, y_new)
            except Exception:
                alpha *= 0.5
                continue
            res_new = float(np.linalg.norm(f_new))
            if res_new < res or res_new < tol:
                y, fval, res = y_new, f_new, res_new
                break
            alpha *= 0.5
        else:
            break  # step collapse
    if res < SUCCESS_RESIDUAL:
        return y, max_iter, res
    raise NewtonDivergedError(
        f"cost-exponential Newton stalled at residual {res:.3e}"
    )


def c_exp(
    cost: Cost,
    x: Point,
    p,
    domain: Optional[DomainSpec] = None,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> CExpResult:
    """Solve p = -grad_x c(x, y) for the target y."""
    pf = _as_frame(x, p)
    closed = cost.c_exp_closed(x, pf)
    if closed is not None:
        res = float(np.linalg.norm(pf + cost.grad_x(x, closed)))
        iters = 0
        y = closed
        if res >= tol:
            y, iters, res = _newton(cost, x, pf, closed, tol, max_iter)
    else:
        y0 = cost.newton_initializer(x, pf)
        y, iters, res = _newton(cost, x, pf, y0, tol, max_iter)
    if domain is not None and not domain.contains(y):
        raise OutsideDomainError("cost-exponential target left the target domain")
    return CExpResult(target=y, iterations=iters, residual=res)


def c_exp_inverse(cost: Cost, x: Point, y: Point) -> TangentVector:
    """The momentum p = -grad_x c(x, y), as a tangent vector at x."""
    cost.require_admissible(x, y)
    return TangentVector(x, from_frame(x, -cost.grad_x(x, y)))


def cstar_exp_inverse(cost: Cost, x: Point, y: Point) -> TangentVector:
    """The dual momentum q = -grad_y c(x, y), as a tangent vector at y."""
    cost.require_admissible(x, y)
    return TangentVector(y, from_frame(y, -cost.grad_y(x, y)))


class _SwappedCost:
    """View of a cost with the roles of x and y exchanged."""

    def __init__(self, cost: Cost):
        self._c = cost
        self.spec = cost.spec
        self.manifold = cost.manifold

    def require_admissible(self, y, x):
        self._c.require_admissible(x, y)

    def grad_x(self, y, x):
        return self._c.grad_y(x, y)

    def d2xy(self, y, x):
        return self._c.d2xy(x, y).T

    def c_exp_closed(self, y, q):
        return self._c.cstar_exp_closed(y, q)

    def newton_initializer(self, y, q):
        return self._c.newton_initializer(y, q)


def cstar_exp(
    cost: Cost,
    y: Point,
    q,
    domain: Optional[DomainSpec] = None,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> CExpResult:
    """Solve q = -grad_y c(x, y) for the source x (mirror of c_exp)."""
    return c_exp(_SwappedCost(cost), y, q, domain=domain, tol=tol, max_iter=max_iter)


def symmetry_residual(cost: Cost, x: Point, y: Point, eta, xi) -> float:
    """Residual of the inner-product symmetry of the two mixed Hessians.

    eta lives at x, xi at y (frame coordinates or TangentVectors).  The
    x-side matrix is analytic; the y-side one is recomputed independently
    by differencing grad_y, so the check is not a transpose tautology.
    """
    from .costs import _fd_in_x

    eta_f = _as_frame(x, eta)
    xi_f = _as_frame(y, xi)
    m_xy = cost.d2xy(x, y)  # [i_x, j_y]

    # Independent D^2_yx: difference grad_y over x-chart directions,
    # Richardson-extrapolated so the stencil truncation stays below the
    # rounding floor even for costs with large third derivatives.
    def fd(h):
        return _fd_in_x(cost, x, y, lambda xp: cost.grad_y(xp, y), h)

    t = (4.0 * fd(5e-5) - fd(1e-4)) / 3.0
    m_yx = t.T  # [i_y, k_x]
    try:
        a = np.linalg.solve(m_xy, eta_f)  # in T_y
        b = np.linalg.solve(m_yx, xi_f)  # in T_x
    except np.linalg.LinAlgError:
        raise SingularJacobianError("mixed Hessian singular in symmetry check")
    return abs(float(a @ xi_f) - float(eta_f @ b))
