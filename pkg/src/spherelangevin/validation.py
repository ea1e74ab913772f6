"""Statistical batteries that check the samplers against closed forms.

Each check compares a Monte-Carlo statistic with an exact quantity: the
radial first moment of spherical Brownian motion, the tangent-squared and
squared-distance bounds, the chi-square fit of mixing-variable draws to
the series pmf, and the normalizations of the pmf and the transition
density.  The CLI's validate-sampler command and the acceptance tests
both run these, so a sampler regression fails loudly in both places.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.stats

from .brownian import EXACT_MODE, IncrementMode, brownian_increment_sphere_batch
from .wright_fisher import (
    DEFAULT_TOLERANCES,
    SeriesTolerances,
    qm_pmf,
    qm_table,
    sample_ainfty_batch,
    wf_density_from_zero,
)

__all__ = [
    "CheckResult",
    "radial_checks",
    "pmf_chisquare_check",
    "qm_normalization_check",
    "density_normalization_check",
    "run_sampler_battery",
]

ACCEPTANCE_CHI_PAIRS = ((3.0, 0.5), (5.0, 1.0), (1.5, 2.0))


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one statistical check."""

    name: str
    passed: bool
    observed: float
    reference: float
    stderr: float = float("nan")
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "passed": bool(self.passed),
            "observed": self.observed,
            "reference": self.reference,
        }
        if math.isfinite(self.stderr):
            out["stderr"] = self.stderr
        out.update(self.detail)
        return out


def _mean_se(x):
    n = x.shape[0]
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(n))


def radial_checks(d: int, t: float, n_samples: int,
                  rng: np.random.Generator,
                  mode: IncrementMode = EXACT_MODE,
                  tol: SeriesTolerances = DEFAULT_TOLERANCES):
    """Radial statistics of one batch of increments from a fixed start.

    Always returns the cos-moment check (mean cos r against e^{-dt/2},
    two-sided at 3 standard errors).  Adds the mean tan^2(r/2) <= 2dt
    bound for d >= 3 and the mean r^2 <= dt bound for t <= 0.5, each
    one-sided at 3 standard errors.
    """
    d = int(d)
    t = float(t)
    n_samples = int(n_samples)
    z = np.full(d + 1, 1.0 / math.sqrt(d + 1.0))
    draws = brownian_increment_sphere_batch(z, t, n_samples, mode, tol, rng)
    cos_r = draws @ z

    checks = []
    target = math.exp(-0.5 * d * t)
    m, se = _mean_se(cos_r)
    checks.append(CheckResult(
        name="radial-cos-moment d=%d t=%g" % (d, t),
        passed=abs(m - target) <= 3.0 * se,
        observed=m,
        reference=target,
        stderr=se,
        detail={"deviation_in_se": abs(m - target) / se if se else 0.0,
                "samples": n_samples},
    ))

    if d >= 3:
        denom = np.maximum(1.0 + cos_r, 1e-300)
        tan_sq = (1.0 - cos_r) / denom
        m, se = _mean_se(tan_sq)
        bound = 2.0 * d * t
        checks.append(CheckResult(
            name="tan-squared-bound d=%d t=%g" % (d, t),
            passed=m <= bound + 3.0 * se,
            observed=m,
            reference=bound,
            stderr=se,
            detail={"samples": n_samples},
        ))

    if t <= 0.5:
        r = np.arccos(np.clip(cos_r, -1.0, 1.0))
        m, se = _mean_se(r * r)
        bound = d * t
        checks.append(CheckResult(
            name="r-squared-bound d=%d t=%g" % (d, t),
            passed=m <= bound + 3.0 * se,
            observed=m,
            reference=bound,
            stderr=se,
            detail={"samples": n_samples},
        ))
    return checks


def _merged_expected(theta, t, counts_upto, n_samples, tol):
    """Expected counts per merged bin so every bin holds >= 5.

    Bins are consecutive runs of m values; the final bin absorbs all the
    remaining tail mass, so the expected counts sum to n_samples exactly.
    """
    probs = [qm_pmf(theta, t, m, tol) for m in range(counts_upto + 1)]
    edges = []
    expected = []
    acc = 0.0
    start = 0
    for m, p in enumerate(probs):
        acc += p * n_samples
        if acc >= 5.0:
            edges.append((start, m))
            expected.append(acc)
            acc = 0.0
            start = m + 1
    # whatever is left, plus all mass beyond the table, joins the last bin
    tail = n_samples - sum(expected)
    if edges:
        if tail > 0.0 or start <= counts_upto:
            edges[-1] = (edges[-1][0], None)
            expected[-1] += tail
    else:
        edges.append((0, None))
        expected.append(float(n_samples))
    return edges, np.asarray(expected)


def pmf_chisquare_check(theta: float, t: float, n_samples: int,
                        rng: np.random.Generator,
                        significance: float = 0.01,
                        tol: SeriesTolerances = DEFAULT_TOLERANCES,
                        ) -> CheckResult:
    """Goodness of fit of sampler draws against the series pmf."""
    n_samples = int(n_samples)
    draws = sample_ainfty_batch(theta, t, n_samples, tol, rng)
    hi = int(draws.max())
    counts_full = np.bincount(draws, minlength=hi + 1).astype(np.float64)

    edges, expected = _merged_expected(theta, t, hi, n_samples, tol)
    observed = np.empty(len(edges))
    for b, (lo, up) in enumerate(edges):
        if up is None:
            observed[b] = counts_full[lo:].sum()
        else:
            observed[b] = counts_full[lo:up + 1].sum()
    # guard against float crumbs upsetting scipy's equal-sum requirement
    expected *= observed.sum() / expected.sum()
    stat, pvalue = scipy.stats.chisquare(observed, expected)
    return CheckResult(
        name="ainfty-pmf-chisquare theta=%g t=%g" % (theta, t),
        passed=pvalue >= significance,
        observed=float(pvalue),
        reference=float(significance),
        detail={"chi2": float(stat), "bins": len(edges),
                "samples": n_samples},
    )


def qm_normalization_check(theta: float, t: float,
                           mass_tol: float = 1e-4,
                           tol: SeriesTolerances = DEFAULT_TOLERANCES,
                           ) -> CheckResult:
    """Sum of the pmf over its effective support against 1."""
    table = qm_table(theta, t, tol, mass_tol=mass_tol * 1e-3)
    total = float(table.sum())
    return CheckResult(
        name="qm-normalization theta=%g t=%g" % (theta, t),
        passed=abs(total - 1.0) <= mass_tol,
        observed=total,
        reference=1.0,
        detail={"terms": int(table.shape[0]), "tolerance": mass_tol},
    )


def density_normalization_check(d: int, t: float,
                                quad_tol: float = 1e-3,
                                tol: SeriesTolerances = DEFAULT_TOLERANCES,
                                ) -> CheckResult:
    """Quadrature of the transition density from zero against 1."""
    val, est_err = scipy.integrate.quad(
        wf_density_from_zero, 0.0, 1.0, args=(d, t, tol),
        limit=200, epsabs=1e-10, epsrel=1e-10)
    return CheckResult(
        name="wf-density-normalization d=%d t=%g" % (d, t),
        passed=abs(val - 1.0) <= quad_tol,
        observed=float(val),
        reference=1.0,
        detail={"quadrature_error_estimate": float(est_err),
                "tolerance": quad_tol},
    )


def run_sampler_battery(ds, ts, n_samples: int, rng: np.random.Generator,
                        mode: IncrementMode = EXACT_MODE,
                        tol: SeriesTolerances = DEFAULT_TOLERANCES,
                        chi_pairs=ACCEPTANCE_CHI_PAIRS,
                        significance: float = 0.01):
    """The full battery over a (d, t) grid plus the pmf checks."""
    results = []
    for d in ds:
        for t in ts:
            results.extend(radial_checks(d, t, n_samples, rng, mode, tol))
            results.append(density_normalization_check(d, t, tol=tol))
    for theta, t in chi_pairs:
        results.append(pmf_chisquare_check(
            theta, t, n_samples, rng, significance, tol))
        results.append(qm_normalization_check(theta, t, tol=tol))
    return results
