"""Pure-Python sampler kernels.

This is the reference implementation of the hot sampling loops. The compiled
module ``_cykern`` mirrors it operation for operation: fed the same numpy
Generator, both backends consume the identical uniform stream (one
``next_double`` per ``rng.random()``) and return bit-identical draws, which is
what the cross-backend equality tests assert. Keep the two files in lockstep
when editing either.

Scalar math goes through the C library (``math.*``) and ``scipy.special``'s
log-Gamma so that every intermediate value is the same IEEE double on both
sides.
"""

import math

import numpy as np
from scipy.special import gammaln

from ..errors import NumericalFailure

BACKEND_NAME = "python"

TWO_PI = 6.283185307179586


def log_coefficient_a(k, m, theta):
    """log of the series coefficient a_{km}.

    a_{km} = (theta + 2k - 1) / (m! (k-m)!) * Gamma(theta+m+k-1) / Gamma(theta+m)

    evaluated in log space; the k = m = 0 limit equals 1 for every theta > 0
    (the apparent pole at theta = 1 cancels against the Gamma ratio).
    """
    if k == 0:
        return 0.0
    return (
        math.log(theta + 2.0 * k - 1.0)
        - float(gammaln(m + 1.0))
        - float(gammaln(k - m + 1.0))
        + float(gammaln(theta + m + k - 1.0))
        - float(gammaln(theta + m))
    )


def log_coefficient_b(k, m, t, theta):
    """log b_k(m) = log a_{km} - k (k + theta - 1) t / 2 (time-damped term)."""
    return log_coefficient_a(k, m, theta) - 0.5 * (k * (k + theta - 1.0)) * t


def normal_sample(rng):
    """One standard normal by Box-Muller, cosine branch; partner discarded."""
    u1 = rng.random()
    u2 = rng.random()
    r = math.sqrt(-2.0 * math.log1p(-u1))
    return r * math.cos(TWO_PI * u2)


def _normal_pair(rng):
    u1 = rng.random()
    u2 = rng.random()
    r = math.sqrt(-2.0 * math.log1p(-u1))
    a = TWO_PI * u2
    return r * math.cos(a), r * math.sin(a)


def gamma_sample(a, rng):
    """Gamma(a, 1) draw by the Marsaglia-Tsang squeeze-rejection method.

    Exact for every a > 0; shapes below one use the standard boost
    Gamma(a) = Gamma(a+1) * U^(1/a).
    """
    if not a > 0.0:
        raise ValueError("gamma shape must be positive, got %r" % (a,))
    if a < 1.0:
        x = gamma_sample(a + 1.0, rng)
        u = rng.random()
        return x * math.pow(1.0 - u, 1.0 / a)
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = normal_sample(rng)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.random()
        if u < 1.0 - 0.0331 * (x * x) * (x * x):
            return d * v
        if u <= 0.0:
            return d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


def beta_sample(a, b, rng):
    """Beta(a, b) as G_a / (G_a + G_b) from two gamma draws."""
    ga = gamma_sample(a, rng)
    gb = gamma_sample(b, rng)
    return ga / (ga + gb)


def binomial_sample(m, p, rng):
    """Binomial(m, p) as a Bernoulli sum: exact, O(m), no underflow for any m."""
    if m < 0:
        raise ValueError("binomial count must be nonnegative, got %r" % (m,))
    if m == 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return m
    k = 0
    for _ in range(m):
        if rng.random() < p:
            k += 1
    return k


class AinftySampler:
    """Sampler for the mixture-index distribution A_infinity(theta, t).

    A draw uses a single uniform u. For each candidate value m the tail
    probability q_m is bracketed between adjacent partial sums of its
    alternating series (valid once the term index passes the turning point
    where terms start decreasing); the per-m brackets are refined until the
    accumulated CDF brackets separate u, and u is classified to the matching m.

    Series terms are cached across draws, so one object amortizes the
    log-Gamma work over a whole batch or chain. The cache mutates during
    sampling: the object is not thread-safe, give each worker its own.
    """

    __slots__ = ("theta", "t", "max_terms", "_turn", "_kinit", "_terms", "_pref", "_evals")

    def __init__(self, theta, t, max_terms=1_000_000):
        if not (theta > 0.0):
            raise ValueError("theta must be positive, got %r" % (theta,))
        if not (t > 0.0):
            raise ValueError("t must be positive, got %r" % (t,))
        if int(max_terms) < 1:
            raise ValueError("max_terms must be a positive integer")
        self.theta = float(theta)
        self.t = float(t)
        self.max_terms = int(max_terms)
        self._turn = []
        self._kinit = []
        self._terms = []
        self._pref = []
        self._evals = 0

    def _charge(self, n):
        self._evals += n
        if self._evals > self.max_terms:
            raise NumericalFailure(
                "A-infinity series (theta=%g, t=%g) exceeded max_terms=%d in one query"
                % (self.theta, self.t, self.max_terms)
            )

    def _scan_turn(self, m):
        prev = log_coefficient_b(m, m, self.t, self.theta)
        self._charge(1)
        i = 0
        while True:
            cur = log_coefficient_b(m + i + 1, m, self.t, self.theta)
            self._charge(1)
            if cur < prev:
                return i
            prev = cur
            i += 1

    def _ensure_state(self, j):
        while len(self._turn) <= j:
            m = len(self._turn)
            c = self._scan_turn(m)
            self._turn.append(c)
            self._kinit.append((c + 1) // 2)
            self._terms.append([])
            self._pref.append([])

    def _ensure_terms(self, j, upto):
        terms = self._terms[j]
        pref = self._pref[j]
        while len(terms) <= upto:
            i = len(terms)
            lb = log_coefficient_b(j + i, j, self.t, self.theta)
            self._charge(1)
            v = math.exp(lb)
            terms.append(v)
            if i == 0:
                pref.append(v)
            elif i & 1:
                pref.append(pref[i - 1] - v)
            else:
                pref.append(pref[i - 1] + v)

    def turning_index(self, m):
        """Index offset past which the series terms for q_m decrease."""
        if m < 0:
            raise ValueError("m must be nonnegative")
        self._evals = 0
        self._ensure_state(m)
        return self._turn[m]

    def classify(self, u):
        """Map one uniform u in [0, 1) to a draw of A_infinity(theta, t)."""
        self._evals = 0
        self._ensure_state(0)
        ks = [self._kinit[0]]
        m = 0
        while True:
            while True:
                sm_tot = 0.0
                sp_tot = 0.0
                for j in range(m + 1):
                    top = 2 * ks[j] + 1
                    self._ensure_terms(j, top)
                    pref = self._pref[j]
                    sm_tot += pref[top]
                    sp_tot += pref[top - 1]
                if not (math.isfinite(sm_tot) and math.isfinite(sp_tot)):
                    raise NumericalFailure(
                        "alternating-series brackets overflowed for theta=%g, t=%g "
                        "(t is too small for exact sampling)" % (self.theta, self.t)
                    )
                if not (sm_tot < u < sp_tot):
                    break
                for j in range(m + 1):
                    ks[j] += 1
            if u <= sm_tot:
                return m
            m += 1
            self._ensure_state(m)
            ks.append(self._kinit[m])

    def sample(self, rng):
        return self.classify(rng.random())

    def sample_batch(self, size, rng):
        out = np.empty(int(size), dtype=np.int64)
        for i in range(out.shape[0]):
            out[i] = self.classify(rng.random())
        return out


class WrightFisherSampler:
    """Exact Wright-Fisher diffusion value at horizon t from any start x0.

    Uses the death-process mixture: M ~ A_infinity(theta1 + theta2, t),
    L ~ Binomial(M, x0), Y ~ Beta(theta1 + L, theta2 + M - L).
    """

    __slots__ = ("theta1", "theta2", "t", "_ainf")

    def __init__(self, theta1, theta2, t, max_terms=1_000_000):
        if not (theta1 > 0.0 and theta2 > 0.0):
            raise ValueError(
                "mutation parameters must be positive, got theta1=%r theta2=%r"
                % (theta1, theta2)
            )
        self.theta1 = float(theta1)
        self.theta2 = float(theta2)
        self.t = float(t)
        self._ainf = AinftySampler(self.theta1 + self.theta2, t, max_terms)

    def sample(self, x0, rng):
        if not (0.0 <= x0 <= 1.0):
            raise ValueError("x0 must lie in [0, 1], got %r" % (x0,))
        mm = self._ainf.classify(rng.random())
        ll = binomial_sample(mm, x0, rng)
        return beta_sample(self.theta1 + ll, self.theta2 + (mm - ll), rng)

    def sample_batch(self, x0, size, rng):
        out = np.empty(int(size), dtype=np.float64)
        for i in range(out.shape[0]):
            out[i] = self.sample(x0, rng)
        return out


class SphereBrownianSampler:
    """Exact Brownian-motion increments on S^d for one fixed horizon t.

    The radial part uses the identity Y = (1 - cos r)/2 ~ WF(d/2, d/2)
    started at 0; the tangential direction is uniform on S^{d-1}; the
    increment is assembled in the north-pole frame e_d and Householder
    reflected onto the base point. Reusable across draws and rows; caches the
    underlying series. Not thread-safe.
    """

    __slots__ = ("d", "t", "theta_half", "_ainf")

    def __init__(self, d, t, max_terms=1_000_000):
        if int(d) < 2:
            raise ValueError("exact spherical increments need sphere dimension d >= 2")
        if not (t > 0.0):
            raise ValueError("horizon must be positive, got %r" % (t,))
        self.d = int(d)
        self.t = float(t)
        self.theta_half = 0.5 * float(int(d))
        self._ainf = AinftySampler(float(int(d)), t, max_terms)

    def _one(self, z, o, rng):
        d = self.d
        p = d + 1
        # radial coordinate through the Wright-Fisher identity
        mm = self._ainf.classify(rng.random())
        y = beta_sample(self.theta_half, self.theta_half + mm, rng)
        # uniform tangential direction in R^d
        buf = [0.0] * d
        while True:
            i = 0
            while i < d:
                g1, g2 = _normal_pair(rng)
                buf[i] = g1
                i += 1
                if i < d:
                    buf[i] = g2
                    i += 1
            nrm2 = 0.0
            for i in range(d):
                nrm2 += buf[i] * buf[i]
            if nrm2 > 1e-300:
                break
        inv = 1.0 / math.sqrt(nrm2)
        # increment in the north-pole frame: (2 sqrt(y(1-y)) Y, 1 - 2y)
        s = 2.0 * math.sqrt(y * (1.0 - y))
        for i in range(d):
            o[i] = s * (buf[i] * inv)
        o[d] = 1.0 - 2.0 * y
        # reflect the frame onto z: O = I - 2 h h^T with h ∝ e_d - z; near the
        # pole the reflection degenerates and O = I is exact to tolerance
        hbuf = [0.0] * p
        hn2 = 0.0
        for i in range(p):
            zi = float(z[i])
            if i == d:
                hi = 1.0 - zi
            else:
                hi = 0.0 - zi
            hbuf[i] = hi
            hn2 += hi * hi
        if hn2 >= 1e-24:
            hinv = 1.0 / math.sqrt(hn2)
            dot = 0.0
            for i in range(p):
                hbuf[i] = hbuf[i] * hinv
                dot += hbuf[i] * float(o[i])
            twod = 2.0 * dot
            for i in range(p):
                o[i] = float(o[i]) - twod * hbuf[i]

    def increment(self, z, rng):
        z = np.ascontiguousarray(z, dtype=np.float64)
        if z.ndim != 1 or z.shape[0] != self.d + 1:
            raise ValueError(
                "base point must be a length-%d vector, got shape %r" % (self.d + 1, z.shape)
            )
        out = np.empty_like(z)
        self._one(z, out, rng)
        return out

    def increments(self, base, rng):
        base = np.ascontiguousarray(base, dtype=np.float64)
        if base.ndim != 2 or base.shape[1] != self.d + 1:
            raise ValueError(
                "base points must be an (n, %d) array, got shape %r" % (self.d + 1, base.shape)
            )
        out = np.empty_like(base)
        for r in range(base.shape[0]):
            self._one(base[r], out[r], rng)
        return out
