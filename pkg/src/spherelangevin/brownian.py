"""Brownian-motion increments on products of spheres.

The exact construction draws the radial component of the displacement from
a Wright-Fisher transition law started at zero and wraps it in a uniformly
random direction, so one increment of horizon t is distributed exactly as
spherical Brownian motion run for time t.  A cheaper tangent-space Gaussian
approximation is available for small horizons, where the exact sampler's
alternating series is slow and the approximation error is O(t).

All functions here take standard Brownian time.  The Langevin iteration's
2*eta/beta horizon is produced by :func:`langevin_time` and nowhere else,
so the time convention cannot be applied twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeMismatchError
from .geometry import UNIT_NORM_TOL, ManifoldShape, PointOnM
from .wright_fisher import (
    DEFAULT_TOLERANCES,
    SeriesTolerances,
    WrightFisherParams,
    ainfty_sampling_is_exact,
    sample_wf_batch,
)

__all__ = [
    "EXACT",
    "TANGENT_APPROX",
    "IncrementMode",
    "EXACT_MODE",
    "TANGENT_MODE",
    "langevin_time",
    "increment_is_exact",
    "brownian_increment_sphere",
    "brownian_increment_sphere_batch",
    "brownian_increment_product",
    "ProductBrownian",
]

EXACT = "exact"
TANGENT_APPROX = "tangent_approx"
_KINDS = (EXACT, TANGENT_APPROX)

# Householder degeneracy guard, squared: |e_d - z|^2 below this means z is
# numerically the north pole and the identity map is used instead.
_POLE_TOL_SQ = 1e-24


@dataclass(frozen=True)
class IncrementMode:
    """How increments are generated.

    kind "exact" always goes through the Wright-Fisher construction.  kind
    "tangent_approx" switches to a tangent-space Gaussian once the horizon
    drops below small_t_threshold, trading exactness for speed where the
    series sampler is at its worst.
    """

    kind: str = EXACT
    small_t_threshold: float = 0.05

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(
                "kind must be one of %r, got %r" % (_KINDS, self.kind))
        thr = float(self.small_t_threshold)
        if not (math.isfinite(thr) and thr > 0.0):
            raise ValueError("small_t_threshold must be positive and finite")
        object.__setattr__(self, "small_t_threshold", thr)


EXACT_MODE = IncrementMode(EXACT)
TANGENT_MODE = IncrementMode(TANGENT_APPROX)


def langevin_time(eta: float, beta: float) -> float:
    """Brownian horizon 2*eta/beta of one Langevin step."""
    eta = float(eta)
    beta = float(beta)
    if not (math.isfinite(eta) and eta > 0.0):
        raise ValueError("eta must be positive and finite")
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValueError("beta must be positive and finite")
    return 2.0 * eta / beta


def _check_horizon(t):
    t = float(t)
    if not (math.isfinite(t) and t > 0.0):
        raise ValueError("horizon t must be positive and finite")
    return t


def _uses_tangent_path(t, mode):
    return mode.kind == TANGENT_APPROX and t < mode.small_t_threshold


def increment_is_exact(t: float, mode: IncrementMode = EXACT_MODE,
                       tol: SeriesTolerances = DEFAULT_TOLERANCES) -> bool:
    """True when increments at horizon t carry no approximation.

    False either because the mode routes to the tangent Gaussian or because
    the horizon is below the series sampler's own threshold, in which case
    the radial mixture index comes from a moment-matched approximation.
    """
    t = _check_horizon(t)
    if _uses_tangent_path(t, mode):
        return False
    return ainfty_sampling_is_exact(t, tol)


def _tangent_rows(rows, t, rng):
    """Tangent Gaussian step: per-coordinate variance t, then exp."""
    g = rng.standard_normal(rows.shape) * math.sqrt(t)
    dots = np.einsum("ij,ij->i", g, rows)
    v = g - dots[:, None] * rows
    sp = np.linalg.norm(v, axis=1)
    safe = np.where(sp > 0.0, sp, 1.0)
    out = rows * np.cos(sp)[:, None] + v * (np.sin(sp) / safe)[:, None]
    # rows with a zero tangent draw reduce to cos(0)*row exactly
    return out


def _wf_fallback_rows(rows, t, tol, rng):
    """Wright-Fisher construction with the approximate mixture index.

    Same geometry as the exact kernel; only the integer mixing variable
    inside the radial draw is approximate (flagged by increment_is_exact).
    """
    n, p = rows.shape
    d = p - 1
    half = 0.5 * d
    params = WrightFisherParams(half, half, 0.0, t)
    ys = sample_wf_batch(params, n, tol, rng)

    dirs = rng.standard_normal((n, d))
    nrm = np.linalg.norm(dirs, axis=1)
    while np.any(nrm < 1e-150):
        bad = nrm < 1e-150
        dirs[bad] = rng.standard_normal((int(bad.sum()), d))
        nrm = np.linalg.norm(dirs, axis=1)

    w = np.empty_like(rows)
    w[:, :d] = dirs * (2.0 * np.sqrt(ys * (1.0 - ys)) / nrm)[:, None]
    w[:, d] = 1.0 - 2.0 * ys

    # Householder reflections taking the north pole to each start row
    h = -rows.copy()
    h[:, d] += 1.0
    hn2 = np.einsum("ij,ij->i", h, h)
    degenerate = hn2 < _POLE_TOL_SQ
    denom = np.where(degenerate, 1.0, hn2)
    coef = np.where(degenerate, 0.0,
                    2.0 * np.einsum("ij,ij->i", h, w) / denom)
    w -= coef[:, None] * h
    return w


def _exact_rows(rows, t, tol, rng):
    d = rows.shape[1] - 1
    sampler = _kernels.SphereBrownianSampler(d, t, int(tol.max_terms))
    return sampler.increments(rows, rng)


def _increment_rows(rows, t, mode, tol, rng):
    if _uses_tangent_path(t, mode):
        return _tangent_rows(rows, t, rng)
    if rows.shape[1] - 1 < 2:
        raise ValueError(
            "exact Brownian increments need sphere dimension d >= 2; "
            "use tangent_approx mode for d = 1")
    if ainfty_sampling_is_exact(t, tol):
        return _exact_rows(rows, t, tol, rng)
    return _wf_fallback_rows(rows, t, tol, rng)


def _check_unit_vector(z):
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] < 2:
        raise ShapeMismatchError(
            "z must be a 1-d unit vector of length d+1 >= 2")
    if abs(math.sqrt(float(z @ z)) - 1.0) > UNIT_NORM_TOL:
        raise ValueError("z must be a unit vector (|z| - 1 within 1e-10)")
    return z


def brownian_increment_sphere(z, t: float, mode: IncrementMode = EXACT_MODE,
                              tol: SeriesTolerances = DEFAULT_TOLERANCES,
                              rng: np.random.Generator = None) -> np.ndarray:
    """One Brownian-motion draw on S^d at time t started from z."""
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    z = _check_unit_vector(z)
    t = _check_horizon(t)
    return _increment_rows(z[None, :].copy(), t, mode, tol, rng)[0]


def brownian_increment_sphere_batch(z, t: float, size: int,
                                    mode: IncrementMode = EXACT_MODE,
                                    tol: SeriesTolerances = DEFAULT_TOLERANCES,
                                    rng: np.random.Generator = None,
                                    ) -> np.ndarray:
    """Many independent draws from the same start point, as (size, d+1)."""
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    z = _check_unit_vector(z)
    t = _check_horizon(t)
    size = int(size)
    if size < 1:
        raise ValueError("size must be >= 1")
    base = np.tile(z, (size, 1))
    return _increment_rows(base, t, mode, tol, rng)


def brownian_increment_product(x: PointOnM, t: float,
                               mode: IncrementMode = EXACT_MODE,
                               tol: SeriesTolerances = DEFAULT_TOLERANCES,
                               rng: np.random.Generator = None) -> PointOnM:
    """Independent Brownian increments on every factor of the product."""
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    if not isinstance(x, PointOnM):
        raise TypeError("x must be a PointOnM")
    t = _check_horizon(t)
    return PointOnM(_increment_rows(x.factors, t, mode, tol, rng))


class ProductBrownian:
    """Reusable increment generator at a fixed horizon.

    Chains take thousands of identically distributed increments; holding
    the series state (or the decision that no series is needed) across
    steps avoids rebuilding it every iteration.
    """

    __slots__ = ("shape", "t", "mode", "tol", "path", "is_exact", "_sampler")

    def __init__(self, shape: ManifoldShape, t: float,
                 mode: IncrementMode = EXACT_MODE,
                 tol: SeriesTolerances = DEFAULT_TOLERANCES):
        if not isinstance(shape, ManifoldShape):
            raise TypeError("shape must be a ManifoldShape")
        t = _check_horizon(t)
        self.shape = shape
        self.t = t
        self.mode = mode
        self.tol = tol
        self._sampler = None
        if _uses_tangent_path(t, mode):
            self.path = "tangent-gaussian"
            self.is_exact = False
        else:
            if shape.d < 2:
                raise ValueError(
                    "exact Brownian increments need d >= 2; "
                    "use tangent_approx mode for d = 1")
            if ainfty_sampling_is_exact(t, tol):
                self.path = "exact-series"
                self.is_exact = True
                self._sampler = _kernels.SphereBrownianSampler(
                    shape.d, t, int(tol.max_terms))
            else:
                self.path = "approx-mixture-index"
                self.is_exact = False

    def step_rows(self, rows: np.ndarray,
                  rng: np.random.Generator) -> np.ndarray:
        """Increment raw factor rows; validation is the caller's job."""
        if self._sampler is not None:
            return self._sampler.increments(rows, rng)
        if self.path == "tangent-gaussian":
            return _tangent_rows(rows, self.t, rng)
        return _wf_fallback_rows(rows, self.t, self.tol, rng)

    def step(self, x: PointOnM, rng: np.random.Generator) -> PointOnM:
        if x.shape != self.shape:
            raise ShapeMismatchError(
                "point shape %r does not match sampler shape %r"
                % (x.shape, self.shape))
        return PointOnM(self.step_rows(x.factors, rng))
