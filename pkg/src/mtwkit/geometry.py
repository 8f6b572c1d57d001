"""Manifold primitives: Euclidean n-space and the unit round sphere.

Points carry ambient coordinates; the sphere S^n is handled through its
embedding in R^(n+1) rather than charts, so the only machinery needed by
the cost layer is the exponential/logarithm pair, inner products, and a
deterministic orthonormal frame at each point.  All higher derivatives
elsewhere in the package are taken in exponential (normal) coordinates
built from these frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AntipodalError, BaseMismatchError, CutLocusError

SPHERE_MEMBERSHIP_TOL = 1e-12
TANGENCY_TOL = 1e-10
# Inputs closer to antipodal than this angular margin are rejected.
ANTIPODAL_MARGIN = 1e-6


@dataclass(frozen=True)
class Manifold:
    """Either Euclidean R^n or the unit sphere S^n embedded in R^(n+1).

    ``dim`` is the intrinsic dimension n >= 1.
    """

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("euclidean", "sphere"):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("manifold dimension must be >= 1")

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.kind == "euclidean" else self.dim + 1

    def contains(self, coords: np.ndarray, tol: float = SPHERE_MEMBERSHIP_TOL) -> bool:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.ambient_dim,):
            return False
        if self.kind == "euclidean":
            return bool(np.all(np.isfinite(coords)))
        return abs(np.linalg.norm(coords) - 1.0) <= tol


def euclidean(n: int) -> Manifold:
    return Manifold("euclidean", n)


def sphere(n: int) -> Manifold:
    """The unit round sphere S^n embedded in R^(n+1)."""
    return Manifold("sphere", n)


@dataclass(frozen=True, eq=False)
class Point:
    """A point on a manifold, stored in ambient coordinates."""

    manifold: Manifold
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if not self.manifold.contains(coords):
            raise ValueError(
                f"coordinates {coords} do not lie on {self.manifold.kind}"
                f" of dimension {self.manifold.dim}"
            )

    def close_to(self, other: "Point", tol: float = 1e-10) -> bool:
        return (
            self.manifold == other.manifold
            and float(np.max(np.abs(self.coords - other.coords))) <= tol
        )


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent vector at a base point, in ambient components.

    For sphere base points the components must be tangent to the sphere
    (orthogonal to the base coordinates) within ``TANGENCY_TOL``.
    """

    base: Point
    components: np.ndarray

    def __post_init__(self):
        comps = np.array(self.components, dtype=float)
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)
        if comps.shape != self.base.coords.shape:
            raise ValueError("tangent components must match ambient dimension")
        if self.base.manifold.kind == "sphere":
            if abs(float(comps @ self.base.coords)) > TANGENCY_TOL:
                raise ValueError("sphere tangent vector is not tangent to the base")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))


def project_tangent(base: Point, ambient: np.ndarray) -> TangentVector:
    """Orthogonal projection of an ambient vector onto T_base."""
    v = np.asarray(ambient, dtype=float)
    if base.manifold.kind == "sphere":
        v = v - (v @ base.coords) * base.coords
    return TangentVector(base, v)


def _require_base(x: Point, v: TangentVector) -> None:
    if not v.base.close_to(x, tol=1e-12):
        raise BaseMismatchError("tangent vector is not based at the given point")


def exp_map(m: Manifold, x: Point, v: TangentVector) -> Point:
    """Riemannian exponential.

    Euclidean: translation x + v.  Sphere: the great-circle arc
    cos(|v|) x + sin(|v|) v/|v|, rejecting |v| >= pi (cut locus).
    """
    if x.manifold != m:
        raise BaseMismatchError("point does not live on the given manifold")
    _require_base(x, v)
    if m.kind == "euclidean":
        return Point(m, x.coords + v.components)
    t = v.norm
    if t >= np.pi:
        raise CutLocusError(f"|v| = {t} reaches the cut locus on the sphere")
    if t == 0.0:
        return Point(m, x.coords)
    coords = np.cos(t) * x.coords + np.sin(t) * (v.components / t)
    coords = coords / np.linalg.norm(coords)
    return Point(m, coords)


def _sphere_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Angle between unit vectors; chord formula keeps small angles exact."""
    cos_t = float(np.clip(a @ b, -1.0, 1.0))
    if cos_t >= 0.5:
        return float(2.0 * np.arcsin(min(1.0, 0.5 * float(np.linalg.norm(b - a)))))
    return float(np.arccos(cos_t))


def log_map(m: Manifold, x: Point, y: Point) -> TangentVector:
    """Inverse of :func:`exp_map`; rejects (near-)antipodal sphere pairs."""
    if x.manifold != m or y.manifold != m:
        raise BaseMismatchError("points do not live on the given manifold")
    if m.kind == "euclidean":
        return TangentVector(x, y.coords - x.coords)
    cos_t = float(np.clip(x.coords @ y.coords, -1.0, 1.0))
    t = _sphere_angle(x.coords, y.coords)
    if t > np.pi - ANTIPODAL_MARGIN:
        raise AntipodalError("log_map between nearly antipodal sphere points")
    if t == 0.0:
        return TangentVector(x, np.zeros_like(x.coords))
    direction = y.coords - cos_t * x.coords
    # Re-project: for tiny angles the subtraction leaves rounding noise
    # along x that the t/nrm scaling would otherwise amplify.
    direction = direction - (direction @ x.coords) * x.coords
    nrm = np.linalg.norm(direction)
    if nrm == 0.0:
        return TangentVector(x, np.zeros_like(x.coords))
    return TangentVector(x, (t / nrm) * direction)


def distance(m: Manifold, x: Point, y: Point) -> float:
    if m.kind == "euclidean":
        return float(np.linalg.norm(x.coords - y.coords))
    return _sphere_angle(x.coords, y.coords)


@lru_cache(maxsize=4096)
def _frame_rows(dim: int, ambient_dim: int, key: bytes) -> np.ndarray:
    coords = np.frombuffer(key)
    rows = []
    for k in range(ambient_dim):
        v = np.zeros(ambient_dim)
        v[k] = 1.0
        v = v - (v @ coords) * coords
        for r in rows:
            v = v - (v @ r) * r
        nrm = np.linalg.norm(v)
        if nrm > 1e-6:
            rows.append(v / nrm)
        if len(rows) == dim:
            break
    out = np.array(rows)
    out.setflags(write=False)
    return out


def frame_matrix(x: Point) -> np.ndarray:
    """Rows are the ambient components of the orthonormal frame at x.

    Shape (n, ambient_dim).  Euclidean frames are the standard basis; on
    the sphere the frame is built by Gram-Schmidt over the standard
    ambient basis (fixed order, deterministic for fixed x, cached since
    finite-difference stencils revisit the same base point many times).
    """
    m = x.manifold
    if m.kind == "euclidean":
        return np.eye(m.dim)
    return _frame_rows(m.dim, m.ambient_dim, x.coords.tobytes())


def orthonormal_frame(m: Manifold, x: Point) -> list[TangentVector]:
    """Deterministic orthonormal basis of T_x, as tangent vectors."""
    if x.manifold != m:
        raise BaseMismatchError("point does not live on the given manifold")
    return [TangentVector(x, row) for row in frame_matrix(x)]


def to_frame(x: Point, ambient: np.ndarray) -> np.ndarray:
    """Frame coordinates of an ambient tangent vector at x."""
    return frame_matrix(x) @ np.asarray(ambient, dtype=float)


def from_frame(x: Point, coeffs: np.ndarray) -> np.ndarray:
    """Ambient components of the tangent vector with given frame coords."""
    return frame_matrix(x).T @ np.asarray(coeffs, dtype=float)


def move(x: Point, coeffs: np.ndarray) -> Point:
    """exp_x of the tangent vector with the given frame coordinates."""
    v = TangentVector(x, from_frame(x, coeffs))
    return exp_map(x.manifold, x, v)


def move_many(x: Point, coeffs: np.ndarray) -> np.ndarray:
    """Ambient coordinates of exp_x over a block of frame coefficients.

    ``coeffs`` has shape (k, n); the result has shape (k, ambient_dim).
    Vectorized counterpart of :func:`move` for stencil evaluation.
    """
    C = np.atleast_2d(np.asarray(coeffs, dtype=float))
    V = C @ frame_matrix(x)
    if x.manifold.kind == "euclidean":
        return x.coords + V
    t = np.linalg.norm(V, axis=1)
    if np.any(t >= np.pi):
        raise CutLocusError("a stencil offset reaches the cut locus on the sphere")
    safe = np.where(t == 0.0, 1.0, t)
    out = np.cos(t)[:, None] * x.coords + (np.sin(t) / safe)[:, None] * V
    out[t == 0.0] = x.coords
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def chart_log(x: Point, y: Point) -> np.ndarray:
    """Frame (normal) coordinates of y in the exponential chart at x."""
    return to_frame(x, log_map(x.manifold, x, y).components)
