"""Geometry of the product manifold M = S^d x ... x S^d (n factors).

Points are stored as (n, d+1) arrays of unit rows, one embedded sphere factor
per row. Tangent vectors at a point keep the same layout with each row
orthogonal to the matching point row. The product metric is the sum of the
factor metrics, so geodesics act factor-wise and the distance is the Euclidean
norm of the vector of factor angles.

All maps here are exact closed forms; tolerances only guard validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CutLocusError, ShapeMismatchError

# Validation tolerances for membership of M and of tangent spaces.
UNIT_NORM_TOL = 1e-10
TANGENT_TOL = 1e-10
# A factor pair with <x, y> <= -1 + ANTIPODAL_TOL is treated as on the cut
# locus: the log map has no unique value there.
ANTIPODAL_TOL = 1e-12


@dataclass(frozen=True)
class ManifoldShape:
    """Number of sphere factors and their common dimension.

    ``d`` is the intrinsic sphere dimension; factors are embedded in R^{d+1}.
    """

    n: int
    d: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError("need at least one sphere factor, got n=%r" % (self.n,))
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise ValueError("sphere dimension must be a positive integer, got d=%r" % (self.d,))

    @property
    def ambient_dim(self) -> int:
        return self.d + 1


def _factor_array(factors, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(factors, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatchError("%s must be a 2-D (n, d+1) array, got shape %r" % (what, arr.shape))
    n, p = arr.shape
    if n < 1 or p < 2:
        raise ShapeMismatchError("%s needs n >= 1 rows of length d+1 >= 2, got shape %r" % (what, arr.shape))
    if not np.all(np.isfinite(arr)):
        raise ValueError("%s contains non-finite entries" % (what,))
    return arr


class PointOnM:
    """A point on the product of spheres: one unit row per factor."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        arr = _factor_array(factors, "point")
        norms = np.linalg.norm(arr, axis=1)
        bad = np.abs(norms - 1.0) > UNIT_NORM_TOL
        if np.any(bad):
            i = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(
                "factor %d has norm %.17g, more than %g away from 1"
                % (i, norms[i], UNIT_NORM_TOL)
            )
        self.factors = arr

    @property
    def shape(self) -> ManifoldShape:
        n, p = self.factors.shape
        return ManifoldShape(n=n, d=p - 1)

    def copy(self) -> "PointOnM":
        out = object.__new__(PointOnM)
        out.factors = self.factors.copy()
        return out

    def __repr__(self):
        s = self.shape
        return "PointOnM(n=%d, d=%d)" % (s.n, s.d)


class TangentVector:
    """A tangent vector at ``base``: rows orthogonal to the base point rows."""

    __slots__ = ("base", "factors")

    def __init__(self, base: PointOnM, factors):
        if not isinstance(base, PointOnM):
            raise TypeError("base must be a PointOnM")
        arr = _factor_array(factors, "tangent vector")
        if arr.shape != base.factors.shape:
            raise ShapeMismatchError(
                "tangent shape %r does not match base shape %r" % (arr.shape, base.factors.shape)
            )
        radial = np.abs(np.sum(arr * base.factors, axis=1))
        if np.any(radial > TANGENT_TOL):
            i = int(np.argmax(radial))
            raise ValueError(
                "factor %d is not tangent: <v, x> = %.3g exceeds %g"
                % (i, radial[i], TANGENT_TOL)
            )
        self.base = base
        self.factors = arr

    @property
    def shape(self) -> ManifoldShape:
        return self.base.shape

    def norm(self) -> float:
        """Product-metric norm, sqrt of the sum of squared factor norms."""
        return float(np.sqrt(np.sum(self.factors * self.factors)))

    def factor_norms(self) -> np.ndarray:
        return np.linalg.norm(self.factors, axis=1)

    def scaled(self, c: float) -> "TangentVector":
        out = object.__new__(TangentVector)
        out.base = self.base
        out.factors = self.factors * float(c)
        return out

    def __neg__(self) -> "TangentVector":
        return self.scaled(-1.0)

    def __repr__(self):
        s = self.shape
        return "TangentVector(n=%d, d=%d, norm=%.6g)" % (s.n, s.d, self.norm())


def _check_same_shape(a, b, what: str):
    if a.factors.shape != b.factors.shape:
        raise ShapeMismatchError(
            "%s: shapes %r and %r differ" % (what, a.factors.shape, b.factors.shape)
        )


def exp_map(x: PointOnM, v: TangentVector, t: float = 1.0) -> PointOnM:
    """Geodesic exponential: follow v from x for time t, factor by factor.

    Each factor moves along the great circle exp(x, tv) = x cos(t|v|) +
    (v/|v|) sin(t|v|); zero-speed factors stay put.
    """
    if t < 0:
        raise ValueError("geodesic time must be nonnegative, got %r" % (t,))
    _check_same_shape(x, v, "exp_map")
    X = x.factors
    V = v.factors
    speeds = np.linalg.norm(V, axis=1)
    ang = t * speeds
    cos_a = np.cos(ang)[:, None]
    sin_a = np.sin(ang)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        direction = np.where(speeds[:, None] > 0.0, V / speeds[:, None], 0.0)
    out = X * cos_a + direction * sin_a
    return PointOnM(out)


def log_map(x: PointOnM, y: PointOnM) -> TangentVector:
    """Inverse of exp_map at x: the tangent vector pointing to y.

    Raises CutLocusError when some factor pair is antipodal (the direction is
    not unique there); never returns NaN.
    """
    _check_same_shape(x, y, "log_map")
    X = x.factors
    Y = y.factors
    dots = np.clip(np.sum(X * Y, axis=1), -1.0, 1.0)
    if np.any(dots <= -1.0 + ANTIPODAL_TOL):
        i = int(np.argmin(dots))
        raise CutLocusError(
            "factor %d is antipodal (inner product %.17g); log map undefined" % (i, dots[i])
        )
    ang = np.arccos(dots)
    perp = Y - dots[:, None] * X
    pn = np.linalg.norm(perp, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(pn > 0.0, ang / np.where(pn > 0.0, pn, 1.0), 0.0)
    V = perp * scale[:, None]
    # Kill the tiny radial component left by rounding so the result passes
    # tangency validation even after many chained operations.
    V -= np.sum(V * X, axis=1)[:, None] * X
    return TangentVector(x, V)


def geodesic_distance(x: PointOnM, y: PointOnM) -> float:
    """Product geodesic distance: l2 norm of the per-factor angles."""
    _check_same_shape(x, y, "geodesic_distance")
    dots = np.clip(np.sum(x.factors * y.factors, axis=1), -1.0, 1.0)
    ang = np.arccos(dots)
    return float(np.sqrt(np.sum(ang * ang)))


def factor_angles(x: PointOnM, y: PointOnM) -> np.ndarray:
    """Per-factor geodesic angles arccos<x_i, y_i>, shape (n,)."""
    _check_same_shape(x, y, "factor_angles")
    dots = np.clip(np.sum(x.factors * y.factors, axis=1), -1.0, 1.0)
    return np.arccos(dots)


def project_to_tangent(x: PointOnM, w) -> TangentVector:
    """Orthogonal projection of an ambient (n, d+1) array onto T_x M."""
    W = _factor_array(w, "ambient vector")
    if W.shape != x.factors.shape:
        raise ShapeMismatchError(
            "ambient shape %r does not match point shape %r" % (W.shape, x.factors.shape)
        )
    X = x.factors
    V = W - np.sum(W * X, axis=1)[:, None] * X
    return TangentVector(x, V)


def random_point(shape: ManifoldShape, rng: np.random.Generator) -> PointOnM:
    """Uniform sample on M: normalized Gaussian rows."""
    if not isinstance(shape, ManifoldShape):
        shape = ManifoldShape(*shape)
    while True:
        g = rng.standard_normal((shape.n, shape.ambient_dim))
        norms = np.linalg.norm(g, axis=1)
        if np.all(norms > 1e-12):
            return PointOnM(g / norms[:, None])
