"""Wright-Fisher transition sampling and the A-infinity mixture series.

The neutral Wright-Fisher diffusion with mutation rates (theta1, theta2) has
an exact transition representation: the value at horizon t given start x0 is

    M ~ A_infinity(theta1 + theta2, t),  L ~ Binomial(M, x0),
    Y ~ Beta(theta1 + L, theta2 + M - L).

A_infinity is the number of surviving lineages in the coalescent death
process; its pmf q_m(t) is an alternating series with coefficients
b_k(m) = a_{km} exp(-k (k + theta - 1) t / 2), evaluated in log space because
a_{km} grows like 4^k. Sampling classifies a single uniform against nested
partial-sum brackets of the CDF (no pmf evaluation needed); the deterministic
series values here back the pmf, the density, and the goodness-of-fit
batteries.

For t below ``small_t_threshold`` the alternating series cancels
catastrophically in double precision; the sampler then substitutes a
discrete-normal draw for M whose moments come from the series when it is
well-conditioned and from the small-time asymptotics mean 2/t, variance
2/(3t) otherwise. Every sub-threshold draw is approximate and callers can
(and do) flag it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from . import _kernels
from ._kernels import pykern
from .errors import NumericalFailure

__all__ = [
    "WrightFisherParams",
    "SeriesTolerances",
    "DEFAULT_TOLERANCES",
    "log_coefficient_a",
    "log_coefficient_b",
    "turning_index",
    "qm_pmf",
    "qm_table",
    "ainfty_moments",
    "wf_density_from_zero",
    "sample_ainfty",
    "sample_ainfty_batch",
    "sample_wf",
    "sample_wf_batch",
    "ainfty_sampling_is_exact",
]

# Series sums whose largest term exceeds this lose more than ~1e-4 of their
# double-precision mantissa to cancellation; treat them as ill-conditioned.
_CANCELLATION_CAP = 1e12


@dataclass(frozen=True)
class SeriesTolerances:
    """Knobs for series truncation and sampler budgets.

    tail_tol: absolute truncation target for deterministic series sums.
    max_terms: per-query budget of series-term evaluations.
    small_t_threshold: below this horizon the exact sampler gives way to the
        flagged discrete-normal approximation.
    """

    tail_tol: float = 1e-12
    max_terms: int = 1_000_000
    small_t_threshold: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.tail_tol < 1.0):
            raise ValueError("tail_tol must be in (0, 1), got %r" % (self.tail_tol,))
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be a positive integer")
        if not (self.small_t_threshold > 0.0):
            raise ValueError("small_t_threshold must be positive")


DEFAULT_TOLERANCES = SeriesTolerances()


@dataclass(frozen=True)
class WrightFisherParams:
    """Mutation rates, start point and horizon for one transition draw."""

    theta1: float
    theta2: float
    x0: float
    t: float

    def __post_init__(self):
        if not (self.theta1 > 0.0 and self.theta2 > 0.0):
            raise ValueError(
                "mutation parameters must be positive, got theta1=%r theta2=%r"
                % (self.theta1, self.theta2)
            )
        if not (0.0 <= self.x0 <= 1.0):
            raise ValueError("x0 must lie in [0, 1], got %r" % (self.x0,))
        if not (self.t > 0.0):
            raise ValueError("horizon t must be positive, got %r" % (self.t,))

    @property
    def theta(self) -> float:
        return self.theta1 + self.theta2


def _check_theta_t(theta, t):
    if not (theta > 0.0):
        raise ValueError("theta must be positive, got %r" % (theta,))
    if not (t > 0.0):
        raise ValueError("t must be positive, got %r" % (t,))


def _check_km(k, m):
    if int(k) != k or int(m) != m:
        raise ValueError("k and m must be integers, got k=%r m=%r" % (k, m))
    if m < 0 or k < m:
        raise ValueError("need 0 <= m <= k, got k=%r m=%r" % (k, m))


def log_coefficient_a(k: int, m: int, theta: float) -> float:
    """log a_{km}, the falling-factorial coefficient of the lineage series.

    The k = m = 0 value is the theta-independent limit 1 (so this is safe for
    theta <= 1 where the raw prefactor changes sign).
    """
    if not (theta > 0.0):
        raise ValueError("theta must be positive, got %r" % (theta,))
    _check_km(k, m)
    return pykern.log_coefficient_a(int(k), int(m), float(theta))


def log_coefficient_b(k: int, m: int, t: float, theta: float) -> float:
    """log b_k(m): the series coefficient including its exponential damping."""
    _check_theta_t(theta, t)
    _check_km(k, m)
    return pykern.log_coefficient_b(int(k), int(m), float(t), float(theta))


def turning_index(m: int, theta: float, t: float,
                  tol: SeriesTolerances = DEFAULT_TOLERANCES) -> int:
    """First offset i at which b_{m+i+1}(m) < b_{m+i}(m).

    Beyond this index the series terms decrease monotonically, so adjacent
    partial sums bracket the tail sum.
    """
    _check_theta_t(theta, t)
    if int(m) != m or m < 0:
        raise ValueError("m must be a nonnegative integer, got %r" % (m,))
    m = int(m)
    budget = int(tol.max_terms)
    prev = pykern.log_coefficient_b(m, m, t, theta)
    i = 0
    while True:
        cur = pykern.log_coefficient_b(m + i + 1, m, t, theta)
        if cur < prev:
            return i
        prev = cur
        i += 1
        if i > budget:
            raise NumericalFailure(
                "turning-index scan for m=%d, theta=%g, t=%g exceeded max_terms=%d"
                % (m, theta, t, budget)
            )


def _qm_raw(theta, t, m, tol):
    """(q_m, largest term) by alternating summation with the truncation rule:
    stop once terms are decreasing and below tail_tol."""
    budget = int(tol.max_terms)
    s = 0.0
    max_term = 0.0
    prev_lb = math.inf
    i = 0
    while True:
        if i > budget:
            raise NumericalFailure(
                "q_%d series for theta=%g, t=%g exceeded max_terms=%d"
                % (m, theta, t, budget)
            )
        lb = pykern.log_coefficient_b(m + i, m, t, theta)
        term = math.exp(lb)
        if not math.isfinite(term):
            raise NumericalFailure(
                "q_%d series term overflowed for theta=%g, t=%g" % (m, theta, t)
            )
        if i & 1:
            s -= term
        else:
            s += term
        if term > max_term:
            max_term = term
        if lb < prev_lb and term < tol.tail_tol:
            return s, max_term
        prev_lb = lb
        i += 1


def qm_pmf(theta: float, t: float, m: int,
           tol: SeriesTolerances = DEFAULT_TOLERANCES) -> float:
    """pmf q_m(t) of A_infinity(theta, t), accurate to the truncation rule.

    Tiny excursions outside [0, 1] from floating-point cancellation are
    clamped; larger ones raise NumericalFailure rather than returning a
    silently wrong probability.
    """
    _check_theta_t(theta, t)
    if int(m) != m or m < 0:
        raise ValueError("m must be a nonnegative integer, got %r" % (m,))
    s, max_term = _qm_raw(float(theta), float(t), int(m), tol)
    allowance = max(tol.tail_tol, max_term * 1e-13)
    if s < 0.0:
        if s < -allowance:
            raise NumericalFailure(
                "q_%d(theta=%g, t=%g) = %.3g is negative beyond the cancellation "
                "allowance; t is too small for this series" % (m, theta, t, s)
            )
        return 0.0
    if s > 1.0:
        if s > 1.0 + allowance:
            raise NumericalFailure(
                "q_%d(theta=%g, t=%g) = %.17g exceeds 1 beyond the cancellation "
                "allowance" % (m, theta, t, s)
            )
        return 1.0
    return s


def qm_table(theta: float, t: float,
             tol: SeriesTolerances = DEFAULT_TOLERANCES,
             mass_tol: float = 1e-9) -> np.ndarray:
    """q_0 .. q_M with M chosen so the table covers mass >= 1 - mass_tol."""
    _check_theta_t(theta, t)
    if not (0.0 < mass_tol < 1.0):
        raise ValueError("mass_tol must be in (0, 1)")
    out = []
    cum = 0.0
    m = 0
    # The pmf is unimodal; past the mode, stop once the remaining mass is in.
    while True:
        q = qm_pmf(theta, t, m, tol)
        out.append(q)
        cum += q
        if cum >= 1.0 - mass_tol:
            return np.asarray(out, dtype=np.float64)
        if m > int(tol.max_terms):
            raise NumericalFailure(
                "pmf table for theta=%g, t=%g did not reach mass %g by m=%d"
                % (theta, t, 1.0 - mass_tol, m)
            )
        m += 1


class AinftyMoments(NamedTuple):
    mean: float
    var: float
    source: str  # "series" or "asymptotic"


def ainfty_moments(theta: float, t: float,
                   tol: SeriesTolerances = DEFAULT_TOLERANCES) -> AinftyMoments:
    """Mean and variance of A_infinity(theta, t).

    Sums m q_m and m^2 q_m when the series is well-conditioned; otherwise
    falls back to the small-time asymptotics mean 2/t, variance 2/(3t), and
    says so in ``source``.
    """
    _check_theta_t(theta, t)
    try:
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        m = 0
        prev_q = -1.0
        while True:
            q, max_term = _qm_raw(float(theta), float(t), m, tol)
            if max_term > _CANCELLATION_CAP:
                raise NumericalFailure("series ill-conditioned")
            q = min(1.0, max(0.0, q))
            s0 += q
            s1 += q * m
            s2 += q * m * m
            # the pmf is unimodal: once the bulk of the mass is behind us
            # and the terms sit on the noise floor, nothing real remains
            # (the gate on s0 keeps sub-noise leading terms from tripping
            # this before the mode)
            if s0 >= 0.999 and q < prev_q and q < 1e-14:
                break
            if m > int(tol.max_terms):
                raise NumericalFailure("series did not accumulate mass")
            prev_q = q
            m += 1
        if not (0.999999 <= s0 <= 1.000001):
            raise NumericalFailure("series mass off")
        mean = s1 / s0
        var = s2 / s0 - mean * mean
        if var < 0.0:
            var = 0.0
        return AinftyMoments(mean=mean, var=var, source="series")
    except NumericalFailure:
        return AinftyMoments(mean=2.0 / t, var=2.0 / (3.0 * t), source="asymptotic")


def ainfty_sampling_is_exact(t: float,
                             tol: SeriesTolerances = DEFAULT_TOLERANCES) -> bool:
    """True when the exact alternating-series sampler handles horizon t."""
    return t >= tol.small_t_threshold


def _sample_ainfty_approx(theta, t, tol, rng):
    mom = ainfty_moments(theta, t, tol)
    z = _kernels.normal_sample(rng)
    m = int(math.floor(mom.mean + math.sqrt(mom.var) * z + 0.5))
    return max(0, m)


def sample_ainfty(theta: float, t: float,
                  tol: SeriesTolerances = DEFAULT_TOLERANCES,
                  rng: np.random.Generator = None) -> int:
    """One draw of A_infinity(theta, t).

    Exact for t >= tol.small_t_threshold; below that, a discrete-normal
    approximation (see ainfty_sampling_is_exact to tell which you got).
    """
    _check_theta_t(theta, t)
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    if t >= tol.small_t_threshold:
        sampler = _kernels.AinftySampler(float(theta), float(t), int(tol.max_terms))
        return int(sampler.sample(rng))
    return _sample_ainfty_approx(float(theta), float(t), tol, rng)


def sample_ainfty_batch(theta: float, t: float, size: int,
                        tol: SeriesTolerances = DEFAULT_TOLERANCES,
                        rng: np.random.Generator = None) -> np.ndarray:
    """Vector of A_infinity draws sharing one cached series."""
    _check_theta_t(theta, t)
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    size = int(size)
    if t >= tol.small_t_threshold:
        sampler = _kernels.AinftySampler(float(theta), float(t), int(tol.max_terms))
        return sampler.sample_batch(size, rng)
    out = np.empty(size, dtype=np.int64)
    for i in range(size):
        out[i] = _sample_ainfty_approx(float(theta), float(t), tol, rng)
    return out


def sample_wf(params: WrightFisherParams,
              tol: SeriesTolerances = DEFAULT_TOLERANCES,
              rng: np.random.Generator = None) -> float:
    """One Wright-Fisher transition draw Y_t | Y_0 = x0, in [0, 1]."""
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    if params.t >= tol.small_t_threshold:
        sampler = _kernels.WrightFisherSampler(
            params.theta1, params.theta2, params.t, int(tol.max_terms)
        )
        return float(sampler.sample(params.x0, rng))
    mm = _sample_ainfty_approx(params.theta, params.t, tol, rng)
    ll = _kernels.binomial_sample(mm, params.x0, rng)
    return float(_kernels.beta_sample(params.theta1 + ll, params.theta2 + (mm - ll), rng))


def sample_wf_batch(params: WrightFisherParams, size: int,
                    tol: SeriesTolerances = DEFAULT_TOLERANCES,
                    rng: np.random.Generator = None) -> np.ndarray:
    """Vector of Wright-Fisher transition draws sharing one cached series."""
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    size = int(size)
    if params.t >= tol.small_t_threshold:
        sampler = _kernels.WrightFisherSampler(
            params.theta1, params.theta2, params.t, int(tol.max_terms)
        )
        return sampler.sample_batch(params.x0, size, rng)
    out = np.empty(size, dtype=np.float64)
    for i in range(size):
        mm = _sample_ainfty_approx(params.theta, params.t, tol, rng)
        ll = _kernels.binomial_sample(mm, params.x0, rng)
        out[i] = _kernels.beta_sample(params.theta1 + ll, params.theta2 + (mm - ll), rng)
    return out


def wf_density_from_zero(y: float, d: int, t: float,
                         tol: SeriesTolerances = DEFAULT_TOLERANCES) -> float:
    """Transition density of WF(d/2, d/2) at time t started from 0.

    f(y; t) = sum_m q_m(t) Beta(y; d/2, d/2 + m), the mixture dual to the
    sampling representation with x0 = 0 (the binomial stage collapses).
    """
    _check_theta_t(d, t)
    if int(d) != d or d < 1:
        raise ValueError("d must be a positive integer, got %r" % (d,))
    if not (0.0 <= y <= 1.0):
        raise ValueError("y must lie in [0, 1], got %r" % (y,))
    a = 0.5 * d
    if y == 0.0:
        if d == 2:
            pass  # y^0 finite; fall through to the series
        elif d < 2:
            raise ValueError("density diverges at y=0 for d < 2")
        else:
            return 0.0
    if y == 1.0:
        # every mixture component vanishes at 1 except the m = 0 term when
        # d = 2 (the Beta(1, 1) component is flat)
        return qm_pmf(d, t, 0, tol) if d == 2 else 0.0
    log_y = math.log(y) if y > 0.0 else 0.0
    log_1my = math.log1p(-y)
    total = 0.0
    cum = 0.0
    prev_pdf = math.inf
    prev_q = -math.inf
    pdf_decreasing = False
    q_decreasing = False
    m = 0
    while True:
        q = qm_pmf(d, t, m, tol)
        b = a + m
        log_pdf = (
            (a - 1.0) * log_y
            + (b - 1.0) * log_1my
            - (float(gammaln(a)) + float(gammaln(b)) - float(gammaln(a + b)))
        )
        pdf = math.exp(log_pdf)
        total += q * pdf
        cum += q
        if pdf < prev_pdf:
            pdf_decreasing = True
        if q < prev_q:
            q_decreasing = True
        rem = 1.0 - cum
        if pdf_decreasing and (rem <= 0.0 or rem * pdf < tol.tail_tol):
            return total
        # Past the pmf's mode the true tail decays superexponentially, so
        # once the terms hit the cancellation floor nothing real is left;
        # the accumulated mass itself may sit ~1e-9 shy of 1 from noise.
        # The gate on cum keeps sub-noise leading terms (small t puts the
        # mode far from m = 0) from tripping this exit before the mode.
        if q_decreasing and cum >= 0.999 and q < 1e-14:
            return total
        if m > int(tol.max_terms):
            raise NumericalFailure(
                "density series for d=%d, t=%g did not converge by m=%d" % (d, t, m)
            )
        prev_pdf = pdf
        prev_q = q
        m += 1
