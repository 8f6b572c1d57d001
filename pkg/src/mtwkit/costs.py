"""Catalog of transport cost functions with derivatives up to fourth order.

Every Euclidean catalog entry carries analytic derivative formulas; the
two sphere entries take their second and higher derivatives by finite
differences in exponential charts (see :func:`fd_oracle`), which is also
the independent oracle used to validate every analytic block.

Index conventions for derivative arrays (all in the orthonormal frames
at x and y):

* ``d2xy[i, j]``        -- d^2 c / dx_i dy_j
* ``d3_x_yy[k, i, j]``  -- d^3 c / dx_k dy_i dy_j
* ``d3_xx_y[k, l, i]``  -- d^3 c / dx_k dx_l dy_i
* ``d4_xx_yy[k, l, i, j]`` -- d^4 c / dx_k dx_l dy_i dy_j
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import OutsideDomainError, SingularPairError, UnsupportedOrderError
from .geometry import (
    Manifold,
    Point,
    euclidean,
    frame_matrix,
    move,
    move_many,
    sphere,
)

ORDER_TAGS = (
    "c",
    "grad_x",
    "grad_y",
    "d2xx",
    "d2yy",
    "d2xy",
    "d3_x_yy",
    "d3_xx_y",
    "d4_xx_yy",
)

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class CostSpec:
    """Identifies a catalog cost, its parameters, and its singular set."""

    id: str
    dim: int
    params: dict = field(default_factory=dict)
    r_min: float = 0.05
    tag: str = "expected-A3W"  # or "exploratory"

    def __post_init__(self):
        if self.r_min <= 0:
            raise ValueError("r_min must be positive")


@dataclass
class DerivativeBlock:
    """Requested derivative values at a fixed admissible pair (x, y)."""

    values: dict

    def __getitem__(self, tag: str):
        return self.values[tag]

    def __contains__(self, tag: str) -> bool:
        return tag in self.values


class Polynomial:
    """A real polynomial on R^n given as {exponent tuple: coefficient}.

    Only the value, gradient, and Hessian are needed by the perturbed
    quadratic cost.
    """

    def __init__(self, dim: int, terms: dict):
        self.dim = dim
        self.terms = {tuple(int(e) for e in k): float(v) for k, v in terms.items()}
        for expo in self.terms:
            if len(expo) != dim or any(e < 0 for e in expo):
                raise ValueError(f"bad exponent tuple {expo}")

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls(dim, {})

    def value(self, x: np.ndarray) -> float:
        out = 0.0
        for expo, coef in self.terms.items():
            out += coef * float(np.prod(np.power(x, expo)))
        return out

    def grad(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros(self.dim)
        for expo, coef in self.terms.items():
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                d = list(expo)
                d[i] -= 1
                g[i] += coef * e * float(np.prod(np.power(x, d)))
        return g

    def hess(self, x: np.ndarray) -> np.ndarray:
        h = np.zeros((self.dim, self.dim))
        for expo, coef in self.terms.items():
            for i, ei in enumerate(expo):
                if ei == 0:
                    continue
                for j, ej in enumerate(expo):
                    d = list(expo)
                    d[i] -= 1
                    if i == j:
                        if ei < 2:
                            continue
                        d[j] -= 1
                        h[i, j] += coef * ei * (ei - 1) * float(np.prod(np.power(x, d)))
                    else:
                        if ej == 0:
                            continue
                        d[j] -= 1
                        h[i, j] += coef * ei * ej * float(np.prod(np.power(x, d)))
        return h


class Cost:
    """Base interface shared by all catalog costs."""

    symmetric = True
    singular_set = "none"

    def __init__(self, spec: CostSpec, manifold: Manifold):
        self.spec = spec
        self.manifold = manifold

    # -- admissibility ------------------------------------------------

    def admissible(self, x: Point, y: Point) -> bool:
        return True

    def require_admissible(self, x: Point, y: Point) -> None:
        if not self.admissible(x, y):
            raise SingularPairError(
                f"pair within r_min={self.spec.r_min} of the singular set of"
                f" cost {self.spec.id!r}"
            )

    # -- evaluation and derivatives ----------------------------------

    def value(self, x: Point, y: Point) -> float:
        raise NotImplementedError

    def value_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        """Vectorized value over rows of ambient coordinates X."""
        m = self.manifold
        return np.array([self.value(Point(m, row), y) for row in np.atleast_2d(X)])

    def grad_x(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    def grad_y(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    def grad_y_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        m = self.manifold
        return np.array([self.grad_y(Point(m, row), y) for row in np.atleast_2d(X)])

    def d2yy_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        m = self.manifold
        return np.array([self.d2yy(Point(m, row), y) for row in np.atleast_2d(X)])

    def d2xx(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    def d2yy(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    def d2xy(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    def d3_x_yy(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    def d3_xx_y(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    def d4_xx_yy(self, x: Point, y: Point) -> np.ndarray:
        raise NotImplementedError

    # -- closed-form exponential inverses (None when unavailable) ----

    def c_exp_closed(self, x: Point, p: np.ndarray) -> Optional[Point]:
        return None

    def cstar_exp_closed(self, y: Point, q: np.ndarray) -> Optional[Point]:
        if self.symmetric:
            return self.c_exp_closed(y, q)
        return None

    def newton_initializer(self, x: Point, p: np.ndarray) -> Point:
        """Default Newton starting guess: exp_x of the momentum."""
        return move(x, p)


# ---------------------------------------------------------------------------
# Radial Euclidean costs: c(x, y) = phi(|x - y|^2)
# ---------------------------------------------------------------------------


class RadialCost(Cost):
    """Euclidean cost of the form phi(|x - y|^2) with analytic derivatives."""

    def __init__(self, spec: CostSpec):
        super().__init__(spec, euclidean(spec.dim))

    def phi(self, u: float):
        """Return phi(u) and its first four derivatives."""
        raise NotImplementedError

    def singular_at_diagonal(self) -> bool:
        return False

    def admissible(self, x: Point, y: Point) -> bool:
        if not self.singular_at_diagonal():
            return True
        return float(np.linalg.norm(x.coords - y.coords)) >= self.spec.r_min

    def value(self, x: Point, y: Point) -> float:
        self.require_admissible(x, y)
        r = x.coords - y.coords
        return self.phi(float(r @ r))[0]

    def value_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        R = np.atleast_2d(X) - y.coords
        u = np.einsum("ij,ij->i", R, R)
        if self.singular_at_diagonal() and np.any(np.sqrt(u) < self.spec.r_min):
            raise SingularPairError("sample within r_min of the diagonal")
        return self._phi0_many(u)

    def _phi0_many(self, u: np.ndarray) -> np.ndarray:
        return np.array([self.phi(float(ui))[0] for ui in u])

    def grad_x(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        r = x.coords - y.coords
        p1 = self.phi(float(r @ r))[1]
        return 2.0 * p1 * r

    def grad_y(self, x: Point, y: Point) -> np.ndarray:
        return -self.grad_x(x, y)

    def grad_y_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        R = np.atleast_2d(X) - y.coords
        u = np.einsum("ij,ij->i", R, R)
        if self.singular_at_diagonal() and np.any(np.sqrt(u) < self.spec.r_min):
            raise SingularPairError("sample within r_min of the diagonal")
        p1 = np.array([self.phi(float(ui))[1] for ui in u])
        return -2.0 * p1[:, None] * R

    def _second(self, x: Point, y: Point) -> np.ndarray:
        r = x.coords - y.coords
        _, p1, p2, _, _ = self.phi(float(r @ r))
        return 2.0 * p1 * np.eye(len(r)) + 4.0 * p2 * np.outer(r, r)

    def d2xx(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return self._second(x, y)

    def d2yy(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return self._second(x, y)

    def d2yy_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        X = np.atleast_2d(X)
        R = X - y.coords
        u = np.einsum("ij,ij->i", R, R)
        if self.singular_at_diagonal() and np.any(np.sqrt(u) < self.spec.r_min):
            raise SingularPairError("sample within r_min of the diagonal")
        n = X.shape[1]
        out = np.empty((X.shape[0], n, n))
        eye = np.eye(n)
        for k, ui in enumerate(u):
            _, p1, p2, _, _ = self.phi(float(ui))
            out[k] = 2.0 * p1 * eye + 4.0 * p2 * np.outer(R[k], R[k])
        return out

    def d2xy(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return -self._second(x, y)

    def _third(self, x: Point, y: Point) -> np.ndarray:
        # Fully symmetric pure-x third derivative tensor of phi(|x-y|^2).
        r = x.coords - y.coords
        _, _, p2, p3, _ = self.phi(float(r @ r))
        n = len(r)
        eye = np.eye(n)
        sym = (
            np.einsum("i,jk->ijk", r, eye)
            + np.einsum("j,ik->ijk", r, eye)
            + np.einsum("k,ij->ijk", r, eye)
        )
        return 4.0 * p2 * sym + 8.0 * p3 * np.einsum("i,j,k->ijk", r, r, r)

    def d3_x_yy(self, x: Point, y: Point) -> np.ndarray:
        # Two y-derivatives flip sign twice.
        self.require_admissible(x, y)
        return self._third(x, y)

    def d3_xx_y(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return -self._third(x, y)

    def d4_xx_yy(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        r = x.coords - y.coords
        _, _, p2, p3, p4 = self.phi(float(r @ r))
        n = len(r)
        eye = np.eye(n)
        dd = (
            np.einsum("ij,kl->ijkl", eye, eye)
            + np.einsum("ik,jl->ijkl", eye, eye)
            + np.einsum("il,jk->ijkl", eye, eye)
        )
        drr = (
            np.einsum("ij,k,l->ijkl", eye, r, r)
            + np.einsum("ik,j,l->ijkl", eye, r, r)
            + np.einsum("il,j,k->ijkl", eye, r, r)
            + np.einsum("jk,i,l->ijkl", eye, r, r)
            + np.einsum("jl,i,k->ijkl", eye, r, r)
            + np.einsum("kl,i,j->ijkl", eye, r, r)
        )
        rrrr = np.einsum("i,j,k,l->ijkl", r, r, r, r)
        return 4.0 * p2 * dd + 8.0 * p3 * drr + 16.0 * p4 * rrrr


class QuadraticCost(RadialCost):
    """c(x, y) = |x - y|^2 / 2."""

    singular_set = "none"

    def phi(self, u: float):
        return (0.5 * u, 0.5, 0.0, 0.0, 0.0)

    def _phi0_many(self, u: np.ndarray) -> np.ndarray:
        return 0.5 * u

    def c_exp_closed(self, x: Point, p: np.ndarray) -> Point:
        return Point(self.manifold, x.coords + p)


class LogCost(RadialCost):
    """c(x, y) = -log|x - y|, written as -(1/2) log |x - y|^2."""

    singular_set = "diagonal {x = y}"

    def singular_at_diagonal(self) -> bool:
        return True

    def phi(self, u: float):
        return (
            -0.5 * np.log(u),
            -0.5 / u,
            0.5 / u**2,
            -1.0 / u**3,
            3.0 / u**4,
        )

    def _phi0_many(self, u: np.ndarray) -> np.ndarray:
        return -0.5 * np.log(u)

    def grad_y_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        R = np.atleast_2d(X) - y.coords
        u = np.einsum("ij,ij->i", R, R)
        if np.any(np.sqrt(u) < self.spec.r_min):
            raise SingularPairError("sample within r_min of the diagonal")
        return -2.0 * (-0.5 / u)[:, None] * R

    def c_exp_closed(self, x: Point, p: np.ndarray) -> Optional[Point]:
        nrm2 = float(p @ p)
        if nrm2 == 0.0:
            # Momentum 0 corresponds to the point at infinity.
            raise OutsideDomainError("zero momentum is outside dom(c-Exp_x) for log cost")
        return Point(self.manifold, x.coords - p / nrm2)


class SqrtCost(RadialCost):
    """c(x, y) = sqrt(1 + |x - y|^2)."""

    singular_set = "none"

    def phi(self, u: float):
        s = np.sqrt(1.0 + u)
        return (
            s,
            0.5 / s,
            -0.25 / s**3,
            0.375 / s**5,
            -0.9375 / s**7,
        )

    def _phi0_many(self, u: np.ndarray) -> np.ndarray:
        return np.sqrt(1.0 + u)

    def c_exp_closed(self, x: Point, p: np.ndarray) -> Optional[Point]:
        nrm2 = float(p @ p)
        if nrm2 >= 1.0:
            # dom(c-Exp_x) is the open unit ball.
            raise OutsideDomainError("momentum outside the unit ball for sqrt cost")
        return Point(self.manifold, x.coords + p / np.sqrt(1.0 - nrm2))


class PowerCost(RadialCost):
    """c(x, y) = sign * |x - y|^p / p, p != 0."""

    def __init__(self, spec: CostSpec):
        super().__init__(spec)
        self.p = float(spec.params.get("p", 4.0))
        self.sign = float(spec.params.get("sign", 1.0))
        if self.p == 0.0:
            raise ValueError("power cost exponent must be nonzero")
        if self.sign not in (-1.0, 1.0):
            raise ValueError("power cost sign must be +1 or -1")

    @property
    def singular_set(self):  # type: ignore[override]
        return "none" if self.p == 2.0 else "diagonal {x = y}"

    def singular_at_diagonal(self) -> bool:
        return self.p != 2.0

    def phi(self, u: float):
        # phi(u) = sign/p * u^(p/2)
        a = self.p / 2.0
        c0 = self.sign / self.p
        vals = [c0 * u**a]
        coef = c0
        for k in range(4):
            coef *= a - k
            vals.append(coef * u ** (a - k - 1))
        return tuple(vals)

    def _phi0_many(self, u: np.ndarray) -> np.ndarray:
        return (self.sign / self.p) * u ** (self.p / 2.0)

    def c_exp_closed(self, x: Point, p_vec: np.ndarray) -> Optional[Point]:
        # p_vec = -sign |r|^(p-2) r  =>  r = -sign * unit(p_vec) |p_vec|^(1/(p-1))
        if self.p == 1.0:
            return None
        nrm = float(np.linalg.norm(p_vec))
        if nrm == 0.0:
            raise OutsideDomainError("zero momentum maps to the singular diagonal")
        r = -self.sign * (p_vec / nrm) * nrm ** (1.0 / (self.p - 1.0))
        return Point(self.manifold, x.coords - r)


class PerturbedQuadraticCost(Cost):
    """c(x, y) = |x - y|^2 + (f(x) - g(y))^2 with polynomial convex f, g."""

    symmetric = False
    singular_set = "none"

    def __init__(self, spec: CostSpec):
        super().__init__(spec, euclidean(spec.dim))
        n = spec.dim
        self.f = spec.params.get("f") or Polynomial.zero(n)
        self.g = spec.params.get("g") or Polynomial.zero(n)
        if not isinstance(self.f, Polynomial):
            self.f = Polynomial(n, self.f)
        if not isinstance(self.g, Polynomial):
            self.g = Polynomial(n, self.g)

    def check_gradient_bound(self, low, high, rng, n_samples: int = 256) -> float:
        """Worst sampled |grad f|, |grad g| over the box; must stay < 1."""
        pts = rng.uniform(np.asarray(low), np.asarray(high), size=(n_samples, self.spec.dim))
        worst = 0.0
        for p in pts:
            worst = max(
                worst,
                float(np.linalg.norm(self.f.grad(p))),
                float(np.linalg.norm(self.g.grad(p))),
            )
        return worst

    def value(self, x: Point, y: Point) -> float:
        r = x.coords - y.coords
        s = self.f.value(x.coords) - self.g.value(y.coords)
        return float(r @ r) + s * s

    def value_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        X = np.atleast_2d(X)
        R = X - y.coords
        gy = self.g.value(y.coords)
        s = np.array([self.f.value(row) for row in X]) - gy
        return np.einsum("ij,ij->i", R, R) + s * s

    def grad_x(self, x: Point, y: Point) -> np.ndarray:
        s = self.f.value(x.coords) - self.g.value(y.coords)
        return 2.0 * (x.coords - y.coords) + 2.0 * s * self.f.grad(x.coords)

    def grad_y(self, x: Point, y: Point) -> np.ndarray:
        s = self.f.value(x.coords) - self.g.value(y.coords)
        return -2.0 * (x.coords - y.coords) - 2.0 * s * self.g.grad(y.coords)

    def grad_y_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        X = np.atleast_2d(X)
        gy = self.g.value(y.coords)
        gg = self.g.grad(y.coords)
        s = np.array([self.f.value(row) for row in X]) - gy
        return -2.0 * (X - y.coords) - 2.0 * s[:, None] * gg

    def d2xx(self, x: Point, y: Point) -> np.ndarray:
        s = self.f.value(x.coords) - self.g.value(y.coords)
        gf = self.f.grad(x.coords)
        n = self.spec.dim
        return 2.0 * np.eye(n) + 2.0 * np.outer(gf, gf) + 2.0 * s * self.f.hess(x.coords)

    def d2yy(self, x: Point, y: Point) -> np.ndarray:
        s = self.f.value(x.coords) - self.g.value(y.coords)
        gg = self.g.grad(y.coords)
        n = self.spec.dim
        return 2.0 * np.eye(n) + 2.0 * np.outer(gg, gg) - 2.0 * s * self.g.hess(y.coords)

    def d2yy_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        X = np.atleast_2d(X)
        gy = self.g.value(y.coords)
        gg = self.g.grad(y.coords)
        hg = self.g.hess(y.coords)
        n = self.spec.dim
        base = 2.0 * np.eye(n) + 2.0 * np.outer(gg, gg)
        s = np.array([self.f.value(row) for row in X]) - gy
        return base[None, :, :] - 2.0 * s[:, None, None] * hg[None, :, :]

    def d2xy(self, x: Point, y: Point) -> np.ndarray:
        gf = self.f.grad(x.coords)
        gg = self.g.grad(y.coords)
        return -2.0 * np.eye(self.spec.dim) - 2.0 * np.outer(gf, gg)

    def d3_x_yy(self, x: Point, y: Point) -> np.ndarray:
        gf = self.f.grad(x.coords)
        hg = self.g.hess(y.coords)
        return -2.0 * np.einsum("k,ij->kij", gf, hg)

    def d3_xx_y(self, x: Point, y: Point) -> np.ndarray:
        hf = self.f.hess(x.coords)
        gg = self.g.grad(y.coords)
        return -2.0 * np.einsum("kl,i->kli", hf, gg)

    def d4_xx_yy(self, x: Point, y: Point) -> np.ndarray:
        hf = self.f.hess(x.coords)
        hg = self.g.hess(y.coords)
        return -2.0 * np.einsum("kl,ij->klij", hf, hg)

    def newton_initializer(self, x: Point, p: np.ndarray) -> Point:
        # Dominant quadratic part gives p ~ 2(y - x).
        return Point(self.manifold, x.coords + 0.5 * p)


# ---------------------------------------------------------------------------
# Sphere costs: analytic value and gradient, chart finite differences beyond
# ---------------------------------------------------------------------------


class SphereChartFDCost(Cost):
    """Sphere cost whose order >= 2 derivatives come from chart FD.

    The finite-difference machinery is shared with :func:`fd_oracle`; the
    per-order default steps are chosen so rounding stays well below the
    O(h^2) (Richardson: O(h^4)) truncation of each stencil.
    """

    h2 = 5e-3  # second order, Richardson-extrapolated value stencils
    h3 = 1e-3  # third order, single difference of a second-order block
    h4 = 3e-3  # fourth order, paired differences of a second-order block

    def d2xx(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return _richardson(lambda h: _fd_hess_x(self, x, y, h), self.h2)

    def d2yy(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return _richardson(lambda h: _fd_hess_y(self, x, y, h), self.h2)

    def d2xy(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return _richardson(lambda h: _fd_grad_x_in_y(self, x, y, h), self.h2)

    def d3_x_yy(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        return _fd_in_x(self, x, y, lambda xp: self.d2yy(xp, y), self.h3)

    def d3_xx_y(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        t = _fd_in_y(self, x, y, lambda yp: self.d2xx(x, yp), self.h3)
        # FD tensor arrives as [i_y, k, l]; reorder to [k, l, i_y].
        return np.moveaxis(t, 0, 2)

    def d4_xx_yy(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        t = _fd2_in_y(self, x, y, lambda yp: self.d2xx(x, yp), self.h4)
        # [i_y, j_y, k, l] -> [k, l, i_y, j_y]
        return np.moveaxis(t, (0, 1), (2, 3))


class SphereDistSqCost(SphereChartFDCost):
    """c(x, y) = d(x, y)^2 / 2 with d the round-sphere distance."""

    singular_set = "antipodal pairs"

    def __init__(self, spec: CostSpec):
        super().__init__(spec, sphere(spec.dim))
        # Angular margin for derivative evaluation near the antipode; raw
        # values are allowed much closer (1e-6).
        self.antipodal_margin = float(spec.params.get("antipodal_margin", 1e-2))

    def _angle(self, x: Point, y: Point) -> float:
        return float(np.arccos(np.clip(x.coords @ y.coords, -1.0, 1.0)))

    def admissible(self, x: Point, y: Point) -> bool:
        return self._angle(x, y) <= np.pi - self.antipodal_margin

    def value(self, x: Point, y: Point) -> float:
        t = self._angle(x, y)
        if t > np.pi - 1e-6:
            raise SingularPairError("antipodal pair for sphere distance cost")
        return 0.5 * t * t

    def value_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        t = np.arccos(np.clip(np.atleast_2d(X) @ y.coords, -1.0, 1.0))
        if np.any(t > np.pi - 1e-6):
            raise SingularPairError("antipodal pair for sphere distance cost")
        return 0.5 * t * t

    def grad_x(self, x: Point, y: Point) -> np.ndarray:
        # grad of d^2/2 at x is -log_x(y); returned in the frame at x.
        self.require_admissible(x, y)
        from .geometry import chart_log

        return -chart_log(x, y)

    def grad_y(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        from .geometry import chart_log

        return -chart_log(y, x)

    def grad_y_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        m = self.manifold
        return np.array([self.grad_y(Point(m, row), y) for row in np.atleast_2d(X)])

    def c_exp_closed(self, x: Point, p: np.ndarray) -> Optional[Point]:
        # c-Exp coincides with the Riemannian exponential for this cost.
        if float(np.linalg.norm(p)) >= np.pi:
            raise OutsideDomainError("momentum reaches the sphere cut locus")
        return move(x, p)


class ReflectorAntennaCost(SphereChartFDCost):
    """c(x, y) = -(1/2) log |x - y|^2 restricted to the unit sphere."""

    singular_set = "diagonal {x = y}"

    def __init__(self, spec: CostSpec):
        super().__init__(spec, sphere(spec.dim))

    def admissible(self, x: Point, y: Point) -> bool:
        return float(np.linalg.norm(x.coords - y.coords)) >= self.spec.r_min

    def value(self, x: Point, y: Point) -> float:
        self.require_admissible(x, y)
        r = x.coords - y.coords
        return -0.5 * float(np.log(r @ r))

    def value_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        R = np.atleast_2d(X) - y.coords
        u = np.einsum("ij,ij->i", R, R)
        if np.any(np.sqrt(u) < self.spec.r_min):
            raise SingularPairError("sample within r_min of the diagonal")
        return -0.5 * np.log(u)

    def _ambient_grad_x(self, x: Point, y: Point) -> np.ndarray:
        r = x.coords - y.coords
        return -r / float(r @ r)

    def grad_x(self, x: Point, y: Point) -> np.ndarray:
        # Riemannian gradient = tangential projection of the ambient one,
        # expressed in the frame at x.
        self.require_admissible(x, y)
        return frame_matrix(x) @ self._ambient_grad_x(x, y)

    def grad_y(self, x: Point, y: Point) -> np.ndarray:
        self.require_admissible(x, y)
        r = y.coords - x.coords
        return frame_matrix(y) @ (-r / float(r @ r))

    def grad_y_many(self, X: np.ndarray, y: Point) -> np.ndarray:
        X = np.atleast_2d(X)
        R = y.coords - X
        u = np.einsum("ij,ij->i", R, R)
        if np.any(np.sqrt(u) < self.spec.r_min):
            raise SingularPairError("sample within r_min of the diagonal")
        return (-R / u[:, None]) @ frame_matrix(y).T

    def c_exp_closed(self, x: Point, p: np.ndarray) -> Optional[Point]:
        # In the chart at x the momentum is p = -(cot(t/2)/2) u, with t
        # the angle to y and u the unit direction toward y; inverting
        # gives t = 2 arctan(1/(2|p|)).  p = 0 is the antipodal limit.
        p = np.asarray(p, dtype=float)
        nrm = float(np.linalg.norm(p))
        if nrm == 0.0:
            raise OutsideDomainError("zero momentum is the antipodal limit for this cost")
        t = 2.0 * float(np.arctan(0.5 / nrm))
        return move(x, (-t / nrm) * p)


# ---------------------------------------------------------------------------
# Finite-difference machinery (oracle and sphere-cost derivatives)
# ---------------------------------------------------------------------------


def _unit(n: int, k: int) -> np.ndarray:
    e = np.zeros(n)
    e[k] = 1.0
    return e


def _richardson(f, h: float):
    """Fourth-order extrapolation of an O(h^2) stencil family."""
    return (4.0 * np.asarray(f(h / 2.0)) - np.asarray(f(h))) / 3.0


def _values_x_batch(cost: Cost, base: Point, other: Point, coeffs: np.ndarray) -> np.ndarray:
    """Cost values at chart offsets of the x-argument, vectorized."""
    return cost.value_many(move_many(base, coeffs), other)


def _values_y_batch(cost: Cost, x: Point, base: Point, coeffs: np.ndarray) -> np.ndarray:
    """Cost values at chart offsets of the y-argument, vectorized."""
    coords = move_many(base, coeffs)
    if cost.symmetric:
        return cost.value_many(coords, x)
    m = cost.manifold
    return np.array([cost.value(x, Point(m, row)) for row in coords])


def _grad_stencil(n: int, h: float) -> np.ndarray:
    rows = []
    for k in range(n):
        e = _unit(n, k)
        rows.append(h * e)
        rows.append(-h * e)
    return np.array(rows)


def _hess_stencil(n: int, h: float) -> np.ndarray:
    rows = [np.zeros(n)]
    for i in range(n):
        ei = _unit(n, i)
        rows.append(h * ei)
        rows.append(-h * ei)
    for i in range(n):
        ei = _unit(n, i)
        for j in range(i + 1, n):
            ej = _unit(n, j)
            rows.extend([h * (ei + ej), h * (ei - ej), h * (ej - ei), -h * (ei + ej)])
    return np.array(rows)


def _assemble_hess(n: int, h: float, vals: np.ndarray) -> np.ndarray:
    out = np.empty((n, n))
    c0 = vals[0]
    for i in range(n):
        out[i, i] = (vals[1 + 2 * i] - 2 * c0 + vals[2 + 2 * i]) / h**2
    k = 1 + 2 * n
    for i in range(n):
        for j in range(i + 1, n):
            v = (vals[k] - vals[k + 1] - vals[k + 2] + vals[k + 3]) / (4 * h**2)
            out[i, j] = out[j, i] = v
            k += 4
    return out


def _fd_grad_x(cost: Cost, x: Point, y: Point, h: float) -> np.ndarray:
    n = cost.manifold.dim
    vals = _values_x_batch(cost, x, y, _grad_stencil(n, h))
    return (vals[0::2] - vals[1::2]) / (2 * h)


def _fd_grad_y(cost: Cost, x: Point, y: Point, h: float) -> np.ndarray:
    n = cost.manifold.dim
    vals = _values_y_batch(cost, x, y, _grad_stencil(n, h))
    return (vals[0::2] - vals[1::2]) / (2 * h)


def _fd_hess_x(cost: Cost, x: Point, y: Point, h: float) -> np.ndarray:
    """Chart Hessian in x from raw values (diagonal + cross stencils)."""
    n = cost.manifold.dim
    vals = _values_x_batch(cost, x, y, _hess_stencil(n, h))
    return _assemble_hess(n, h, vals)


def _fd_hess_y(cost: Cost, x: Point, y: Point, h: float) -> np.ndarray:
    n = cost.manifold.dim
    vals = _values_y_batch(cost, x, y, _hess_stencil(n, h))
    return _assemble_hess(n, h, vals)


def _fd_grad_x_in_y(cost: Cost, x: Point, y: Point, h: float) -> np.ndarray:
    """d2xy by differencing grad_x (frame at x is fixed while y moves)."""
    n = cost.manifold.dim
    out = np.empty((n, n))
    for j in range(n):
        e = _unit(n, j)
        out[:, j] = (cost.grad_x(x, move(y, h * e)) - cost.grad_x(x, move(y, -h * e))) / (2 * h)
    return out


def _fd_in_x(cost: Cost, x: Point, y: Point, block, h: float) -> np.ndarray:
    """Stack of central differences of a block over x-chart directions."""
    n = cost.manifold.dim
    rows = []
    for k in range(n):
        e = _unit(n, k)
        rows.append((np.asarray(block(move(x, h * e))) - np.asarray(block(move(x, -h * e)))) / (2 * h))
    return np.array(rows)


def _fd_in_y(cost: Cost, x: Point, y: Point, block, h: float) -> np.ndarray:
    n = cost.manifold.dim
    rows = []
    for k in range(n):
        e = _unit(n, k)
        rows.append((np.asarray(block(move(y, h * e))) - np.asarray(block(move(y, -h * e)))) / (2 * h))
    return np.array(rows)


def _fd2_in_y(cost: Cost, x: Point, y: Point, block, h: float) -> np.ndarray:
    """Second chart differences in y of a block: out[i, j, ...]."""
    n = cost.manifold.dim
    b0 = np.asarray(block(y))
    out = np.empty((n, n) + b0.shape)
    for i in range(n):
        ei = _unit(n, i)
        out[i, i] = (
            np.asarray(block(move(y, h * ei))) - 2 * b0 + np.asarray(block(move(y, -h * ei)))
        ) / h**2
        for j in range(i + 1, n):
            ej = _unit(n, j)
            v = (
                np.asarray(block(move(y, h * (ei + ej))))
                - np.asarray(block(move(y, h * (ei - ej))))
                - np.asarray(block(move(y, h * (ej - ei))))
                + np.asarray(block(move(y, -h * (ei + ej))))
            ) / (4 * h**2)
            out[i, j] = out[j, i] = v
    return out


def fd_oracle(cost: Cost, x: Point, y: Point, tag: str, h: float = DEFAULT_FD_STEP):
    """Independent finite-difference value for one derivative block.

    Gradients are differenced from raw cost values.  Each higher order
    differences the next lower analytic block once (never the block being
    checked), through exp-chart perturbations, so every order is validated
    against the order beneath it with a single O(h^2) central stencil.
    """
    cost.require_admissible(x, y)
    if tag == "c":
        return cost.value(x, y)
    if tag == "grad_x":
        return _fd_grad_x(cost, x, y, h)
    if tag == "grad_y":
        return _fd_grad_y(cost, x, y, h)
    if tag == "d2xx":
        if cost.manifold.kind == "sphere":
            return _richardson(lambda hh: _fd_hess_x(cost, x, y, hh), max(h, 1e-3))
        t = _fd_in_x(cost, x, y, lambda xp: cost.grad_x(xp, y), h)
        return 0.5 * (t + t.T)
    if tag == "d2yy":
        if cost.manifold.kind == "sphere":
            return _richardson(lambda hh: _fd_hess_y(cost, x, y, hh), max(h, 1e-3))
        t = _fd_in_y(cost, x, y, lambda yp: cost.grad_y(x, yp), h)
        return 0.5 * (t + t.T)
    if tag == "d2xy":
        return _fd_grad_x_in_y(cost, x, y, h)
    if tag == "d3_x_yy":
        return _fd_in_x(cost, x, y, lambda xp: cost.d2yy(xp, y), h)
    if tag == "d3_xx_y":
        t = _fd_in_y(cost, x, y, lambda yp: cost.d2xx(x, yp), h)
        return np.moveaxis(t, 0, 2)
    if tag == "d4_xx_yy":
        t = _fd2_in_y(cost, x, y, lambda yp: cost.d2xx(x, yp), h)
        return np.moveaxis(t, (0, 1), (2, 3))
    raise UnsupportedOrderError(f"unknown derivative tag {tag!r}")


def derivatives(cost: Cost, x: Point, y: Point, request: Iterable[str]) -> DerivativeBlock:
    """Evaluate the requested derivative blocks at an admissible pair."""
    cost.require_admissible(x, y)
    methods = {
        "c": cost.value,
        "grad_x": cost.grad_x,
        "grad_y": cost.grad_y,
        "d2xx": cost.d2xx,
        "d2yy": cost.d2yy,
        "d2xy": cost.d2xy,
        "d3_x_yy": cost.d3_x_yy,
        "d3_xx_y": cost.d3_xx_y,
        "d4_xx_yy": cost.d4_xx_yy,
    }
    values = {}
    for tag in request:
        if tag not in methods:
            raise UnsupportedOrderError(f"unknown derivative tag {tag!r}")
        values[tag] = methods[tag](x, y)
    return DerivativeBlock(values)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

_COST_CLASSES = {
    "quadratic": QuadraticCost,
    "perturbed_quadratic": PerturbedQuadraticCost,
    "sqrt": SqrtCost,
    "log": LogCost,
    "power": PowerCost,
    "sphere_dist_sq": SphereDistSqCost,
    "reflector_antenna": ReflectorAntennaCost,
}

# Human-readable catalog rows: (id, parameters, singular set, expected
# curvature condition from the published analysis of these costs).
CATALOG_TABLE = [
    ("quadratic", "-", "none", "A3W (flat baseline, C0 = 0)"),
    ("perturbed_quadratic", "polynomial f, g with |grad| < 1", "none", "A3W (A3S for strictly convex f, g)"),
    ("sqrt", "-", "none", "A3W"),
    ("log", "-", "{x = y}", "A3S"),
    ("power", "any p != 0; exploratory beyond the A3W ranges (e.g. p = 4)", "{x = y} for p != 2", "A3W/A3S per exponent range; scanner reports"),
    ("sphere_dist_sq", "unit round sphere", "antipodal pairs", "A3S"),
    ("reflector_antenna", "log cost on the unit sphere", "{x = y}", "A3S"),
]


def make_cost(spec: CostSpec) -> Cost:
    try:
        cls = _COST_CLASSES[spec.id]
    except KeyError:
        raise ValueError(f"unknown cost id {spec.id!r}") from None
    return cls(spec)


def check_A1_A2(cost: Cost, samples, det_tol: float = 1e-8, p_resolution: float = 1e-6):
    """Spot-check twist (A1, necessary condition) and non-degeneracy (A2).

    ``samples`` is a list of admissible (x, y) pairs.  Returns a
    VerificationReport-style dict consumed by the report layer.
    """
    worst_det = np.inf
    failures = []
    by_x: dict = {}
    for x, y in samples:
        det = abs(float(np.linalg.det(cost.d2xy(x, y))))
        worst_det = min(worst_det, det)
        if det <= det_tol:
            failures.append(
                {"kind": "A2", "x": x.coords.tolist(), "y": y.coords.tolist(), "det": det}
            )
        key = tuple(np.round(x.coords, 12))
        by_x.setdefault(key, []).append((x, y))
    for pairs in by_x.values():
        ps = [(-cost.grad_x(x, y), y) for x, y in pairs]
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                dp = float(np.linalg.norm(ps[i][0] - ps[j][0]))
                dy = float(np.linalg.norm(ps[i][1].coords - ps[j][1].coords))
                if dy > 1e-8 and dp < p_resolution:
                    failures.append(
                        {
                            "kind": "A1",
                            "y_a": ps[i][1].coords.tolist(),
                            "y_b": ps[j][1].coords.tolist(),
                            "p_gap": dp,
                        }
                    )
    return {
        "n_samples": len(samples),
        "min_abs_det_d2xy": float(worst_det),
        "failures": failures,
        "passed": not failures,
    }
