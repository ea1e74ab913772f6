"""The Riemannian Langevin iteration and a deterministic descent baseline.

One Langevin step is a geodesic gradient move of size eta followed by an
exact Brownian increment of horizon 2*eta/beta.  The chain driver records
thinned trajectories, tracks the best value visited, and renormalizes the
factor rows defensively each step so that float drift cannot accumulate
over long runs (the pre-renormalization error is asserted small, so a real
geometry bug cannot hide behind the cleanup).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .brownian import EXACT_MODE, IncrementMode, ProductBrownian, langevin_time
from .errors import NumericalFailure, ShapeMismatchError
from .geometry import PointOnM
from .wright_fisher import DEFAULT_TOLERANCES, SeriesTolerances
from ._kernels import BACKEND_NAME

__all__ = [
    "LangevinConfig",
    "ChainState",
    "RunReport",
    "langevin_step",
    "run_chain",
    "rgd_baseline",
]

# A renormalization larger than this means the step math went wrong, not
# ordinary rounding; refuse to paper over it.
_RENORM_LIMIT = 1e-6


@dataclass(frozen=True)
class LangevinConfig:
    eta: float
    beta: float
    iterations: int
    mode: IncrementMode = EXACT_MODE
    record_every: int = 1
    tolerances: SeriesTolerances = field(default_factory=lambda: DEFAULT_TOLERANCES)

    def __post_init__(self):
        eta = float(self.eta)
        beta = float(self.beta)
        if not (math.isfinite(eta) and eta > 0.0):
            raise ValueError("eta must be positive and finite")
        if not (math.isfinite(beta) and beta > 0.0):
            raise ValueError("beta must be positive and finite")
        iters = int(self.iterations)
        if iters < 1:
            raise ValueError("iterations must be >= 1")
        rec = int(self.record_every)
        if rec < 1:
            raise ValueError("record_every must be >= 1")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "iterations", iters)
        object.__setattr__(self, "record_every", rec)
        if not isinstance(self.mode, IncrementMode):
            raise TypeError("mode must be an IncrementMode")
        if not isinstance(self.tolerances, SeriesTolerances):
            raise TypeError("tolerances must be a SeriesTolerances")

    @property
    def horizon(self) -> float:
        """Brownian time 2*eta/beta of each step's noise."""
        return langevin_time(self.eta, self.beta)

    def as_dict(self) -> dict:
        return {
            "eta": self.eta,
            "beta": self.beta,
            "iterations": self.iterations,
            "mode": {"kind": self.mode.kind,
                     "small_t_threshold": self.mode.small_t_threshold},
            "record_every": self.record_every,
            "brownian_horizon": self.horizon,
            "tolerances": {
                "tail_tol": self.tolerances.tail_tol,
                "max_terms": self.tolerances.max_terms,
                "small_t_threshold": self.tolerances.small_t_threshold,
            },
        }


@dataclass
class ChainState:
    """Mutable view of a chain mid-run."""

    position: PointOnM
    step_index: int
    best_value: float
    best_position: PointOnM


@dataclass(frozen=True)
class RunReport:
    """Everything a chain run produced, thinned trajectory included.

    records holds (step, objective value, geodesic distance moved by the
    step that landed there); the step-0 record has distance 0.  best_value
    tracks every visited step, not just recorded ones.
    """

    config: LangevinConfig
    seed: object
    records: tuple
    best_value: float
    best_step: int
    best_position: PointOnM
    final_value: float
    final_position: PointOnM
    wall_clock_seconds: float
    exact_increments: bool
    sampler_path: str
    backend: str

    def as_dict(self) -> dict:
        return {
            "config": self.config.as_dict(),
            "seed": self.seed,
            "records": [
                {"step": s, "value": v, "distance_moved": dm}
                for s, v, dm in self.records
            ],
            "best_value": self.best_value,
            "best_step": self.best_step,
            "final_value": self.final_value,
            "exact_increments": self.exact_increments,
            "sampler_path": self.sampler_path,
            "backend": self.backend,
        }


def _project_rows(grad, rows):
    dots = np.einsum("ij,ij->i", grad, rows)
    return grad - dots[:, None] * rows


def _geodesic_rows(rows, tang, scale):
    """exp(x, -scale * tang) per factor, on raw arrays."""
    sp = np.linalg.norm(tang, axis=1)
    ang = scale * sp
    safe = np.where(sp > 0.0, sp, 1.0)
    return rows * np.cos(ang)[:, None] - tang * (np.sin(ang) / safe)[:, None]


def _renormalize_rows(rows):
    nr = np.linalg.norm(rows, axis=1)
    err = float(np.max(np.abs(nr - 1.0)))
    if not (err < _RENORM_LIMIT):
        raise NumericalFailure(
            "factor norms drifted by %.3e in one step; geometry is broken"
            % err)
    rows /= nr[:, None]
    return rows


def _dist_rows(a, b):
    dots = np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0)
    return float(np.linalg.norm(np.arccos(dots)))


def _one_step(obj, rows, grad, eta, noise, rng):
    tang = _project_rows(grad, rows)
    hat = _geodesic_rows(rows, tang, eta)
    new = noise.step_rows(hat, rng)
    return _renormalize_rows(new)


def langevin_step(obj, x: PointOnM, eta: float, beta: float,
                  mode: IncrementMode = EXACT_MODE,
                  rng: np.random.Generator = None,
                  tol: SeriesTolerances = DEFAULT_TOLERANCES) -> PointOnM:
    """One gradient-plus-noise update; the chain driver iterates this."""
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    rows = x.factors.copy()
    if getattr(obj, "shape", None) is not None and obj.shape != x.shape:
        raise ShapeMismatchError(
            "point shape %r does not match objective shape %r"
            % (x.shape, obj.shape))
    noise = ProductBrownian(x.shape, langevin_time(eta, beta), mode, tol)
    _, grad = obj.value_and_gradient_rows(rows)
    return PointOnM(_one_step(obj, rows, grad, float(eta), noise, rng))


def run_chain(obj, x0: PointOnM, config: LangevinConfig,
              rng: np.random.Generator = None, seed=None) -> RunReport:
    """Run a full chain; a pure function of (rng state, config, inputs).

    seed is a label echoed into the report for provenance; the entropy
    itself lives in the caller-supplied generator.
    """
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    if not isinstance(x0, PointOnM):
        raise TypeError("x0 must be a PointOnM")
    if getattr(obj, "shape", None) is not None and obj.shape != x0.shape:
        raise ShapeMismatchError(
            "start point shape %r does not match objective shape %r"
            % (x0.shape, obj.shape))

    t0 = time.perf_counter()
    noise = ProductBrownian(x0.shape, config.horizon, config.mode,
                            config.tolerances)
    rows = x0.factors.copy()
    val, grad = obj.value_and_gradient_rows(rows)
    best_val = val
    best_rows = rows.copy()
    best_step = 0
    records = [(0, val, 0.0)]

    for k in range(1, config.iterations + 1):
        prev = rows
        rows = _one_step(obj, rows, grad, config.eta, noise, rng)
        val, grad = obj.value_and_gradient_rows(rows)
        if val < best_val:
            best_val = val
            best_rows = rows.copy()
            best_step = k
        if k % config.record_every == 0 or k == config.iterations:
            records.append((k, val, _dist_rows(prev, rows)))

    return RunReport(
        config=config,
        seed=seed,
        records=tuple(records),
        best_value=best_val,
        best_step=best_step,
        best_position=PointOnM(best_rows),
        final_value=val,
        final_position=PointOnM(rows),
        wall_clock_seconds=time.perf_counter() - t0,
        exact_increments=noise.is_exact,
        sampler_path=noise.path,
        backend=BACKEND_NAME,
    )


def rgd_baseline(obj, x0: PointOnM, step: float, max_iters: int = 1000,
                 grad_tol: float = 1e-9):
    """Riemannian gradient descent with Armijo backtracking.

    Returns (point, value) for the last accepted iterate.  The objective
    never increases; non-convergence within max_iters returns the best
    point found and emits a warning instead of raising.
    """
    step = float(step)
    if not (math.isfinite(step) and step > 0.0):
        raise ValueError("step must be positive and finite")
    max_iters = int(max_iters)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    grad_tol = float(grad_tol)
    if getattr(obj, "shape", None) is not None and obj.shape != x0.shape:
        raise ShapeMismatchError(
            "start point shape %r does not match objective shape %r"
            % (x0.shape, obj.shape))

    rows = x0.factors.copy()
    val, grad = obj.value_and_gradient_rows(rows)
    converged = False
    for _ in range(max_iters):
        tang = _project_rows(grad, rows)
        gn2 = float(np.einsum("ij,ij->", tang, tang))
        gn = math.sqrt(gn2)
        if gn <= grad_tol:
            converged = True
            break
        trial = step
        accepted = False
        for _ in range(60):
            cand = _geodesic_rows(rows, tang, trial)
            cand = _renormalize_rows(cand)
            cval = obj.value_rows(cand)
            if cval <= val - 1e-4 * trial * gn2:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            warnings.warn(
                "line search stalled at gradient norm %.3e; returning the "
                "best point found" % gn, RuntimeWarning, stacklevel=2)
            break
        rows = cand
        val, grad = obj.value_and_gradient_rows(rows)
    else:
        tang = _project_rows(grad, rows)
        gn = math.sqrt(float(np.einsum("ij,ij->", tang, tang)))
        if gn > grad_tol:
            warnings.warn(
                "gradient norm %.3e still above %.1e after %d iterations"
                % (gn, grad_tol, max_iters), RuntimeWarning, stacklevel=2)
        else:
            converged = True

    return PointOnM(rows), val
