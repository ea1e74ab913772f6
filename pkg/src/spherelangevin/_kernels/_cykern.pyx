# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampler kernels.

Mirror of ``pykern.py``, operation for operation: both backends consume the
identical PCG64 uniform stream (one ``next_double`` per draw request) and all
scalar math routes through the same C library and the same cephes log-Gamma,
so draws are bit-identical across backends. Keep the two files in lockstep
when editing either.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport cos, exp, isfinite, log, log1p, pow, sin, sqrt
from libc.stdlib cimport free, malloc, realloc

import numpy as np

from numpy.random cimport bitgen_t

from scipy.special.cython_special cimport gammaln

from ..errors import NumericalFailure

BACKEND_NAME = "cython"

cdef double TWO_PI = 6.283185307179586


cdef bitgen_t *_bitgen(object rng) except NULL:
    """Borrow the C bit-generator interface from a numpy Generator."""
    capsule = rng.bit_generator.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef double _log_a(long k, long m, double theta) noexcept nogil:
    if k == 0:
        return 0.0
    return (
        log(theta + 2.0 * k - 1.0)
        - gammaln(m + 1.0)
        - gammaln(k - m + 1.0)
        + gammaln(theta + m + k - 1.0)
        - gammaln(theta + m)
    )


cdef double _log_b(long k, long m, double t, double theta) noexcept nogil:
    return _log_a(k, m, theta) - 0.5 * (k * (k + theta - 1.0)) * t


def log_coefficient_a(k, m, theta):
    """log of the series coefficient a_{km}; k = m = 0 limit equals 1."""
    return _log_a(k, m, theta)


def log_coefficient_b(k, m, t, theta):
    """log b_k(m) = log a_{km} - k (k + theta - 1) t / 2 (time-damped term)."""
    return _log_b(k, m, t, theta)


cdef double _normal(bitgen_t *bg) noexcept nogil:
    cdef double u1 = bg.next_double(bg.state)
    cdef double u2 = bg.next_double(bg.state)
    cdef double r = sqrt(-2.0 * log1p(-u1))
    return r * cos(TWO_PI * u2)


cdef void _normal_pair(bitgen_t *bg, double *g1, double *g2) noexcept nogil:
    cdef double u1 = bg.next_double(bg.state)
    cdef double u2 = bg.next_double(bg.state)
    cdef double r = sqrt(-2.0 * log1p(-u1))
    cdef double a = TWO_PI * u2
    g1[0] = r * cos(a)
    g2[0] = r * sin(a)


cdef double _gamma(double a, bitgen_t *bg) noexcept nogil:
    cdef double x, u, d, c, v
    if a < 1.0:
        x = _gamma(a + 1.0, bg)
        u = bg.next_double(bg.state)
        return x * pow(1.0 - u, 1.0 / a)
    d = a - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        x = _normal(bg)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = bg.next_double(bg.state)
        if u < 1.0 - 0.0331 * (x * x) * (x * x):
            return d * v
        if u <= 0.0:
            return d * v
        if log(u) < 0.5 * x * x + d * (1.0 - v + log(v)):
            return d * v


cdef double _beta(double a, double b, bitgen_t *bg) noexcept nogil:
    cdef double ga = _gamma(a, bg)
    cdef double gb = _gamma(b, bg)
    return ga / (ga + gb)


cdef long _binomial(long m, double p, bitgen_t *bg) noexcept nogil:
    cdef long k, i
    if m == 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return m
    k = 0
    for i in range(m):
        if bg.next_double(bg.state) < p:
            k += 1
    return k


def normal_sample(rng):
    """One standard normal by Box-Muller, cosine branch; partner discarded."""
    cdef bitgen_t *bg = _bitgen(rng)
    return _normal(bg)


def gamma_sample(a, rng):
    """Gamma(a, 1) draw by the Marsaglia-Tsang squeeze-rejection method."""
    if not a > 0.0:
        raise ValueError("gamma shape must be positive, got %r" % (a,))
    cdef bitgen_t *bg = _bitgen(rng)
    return _gamma(a, bg)


def beta_sample(a, b, rng):
    """Beta(a, b) as G_a / (G_a + G_b) from two gamma draws."""
    if not a > 0.0:
        raise ValueError("gamma shape must be positive, got %r" % (a,))
    if not b > 0.0:
        raise ValueError("gamma shape must be positive, got %r" % (b,))
    cdef bitgen_t *bg = _bitgen(rng)
    return _beta(a, b, bg)


def binomial_sample(m, p, rng):
    """Binomial(m, p) as a Bernoulli sum: exact, O(m), no underflow for any m."""
    if m < 0:
        raise ValueError("binomial count must be nonnegative, got %r" % (m,))
    cdef bitgen_t *bg = _bitgen(rng)
    return _binomial(m, p, bg)


cdef class AinftySampler:
    """Sampler for the mixture-index distribution A_infinity(theta, t).

    Compiled twin of ``pykern.AinftySampler``: same bracket walk, same caching,
    same uniform-stream consumption. Not thread-safe.
    """

    cdef readonly double theta
    cdef readonly double t
    cdef readonly long max_terms
    cdef long _nstates, _capstates
    cdef long *_turn
    cdef long *_kinit
    cdef long *_nterms
    cdef long *_capterms
    cdef double **_terms
    cdef double **_pref
    cdef long *_ks
    cdef long _capks
    cdef long _evals

    def __cinit__(self, theta, t, max_terms=1_000_000):
        if not (theta > 0.0):
            raise ValueError("theta must be positive, got %r" % (theta,))
        if not (t > 0.0):
            raise ValueError("t must be positive, got %r" % (t,))
        if int(max_terms) < 1:
            raise ValueError("max_terms must be a positive integer")
        self.theta = theta
        self.t = t
        self.max_terms = max_terms
        self._nstates = 0
        self._capstates = 0
        self._turn = NULL
        self._kinit = NULL
        self._nterms = NULL
        self._capterms = NULL
        self._terms = NULL
        self._pref = NULL
        self._ks = NULL
        self._capks = 0
        self._evals = 0

    def __dealloc__(self):
        cdef long j
        if self._terms != NULL:
            for j in range(self._nstates):
                if self._terms[j] != NULL:
                    free(self._terms[j])
            free(self._terms)
        if self._pref != NULL:
            for j in range(self._nstates):
                if self._pref[j] != NULL:
                    free(self._pref[j])
            free(self._pref)
        free(self._turn)
        free(self._kinit)
        free(self._nterms)
        free(self._capterms)
        free(self._ks)

    cdef int _charge(self, long n) except -1:
        self._evals += n
        if self._evals > self.max_terms:
            raise NumericalFailure(
                "A-infinity series (theta=%g, t=%g) exceeded max_terms=%d in one query"
                % (self.theta, self.t, self.max_terms)
            )
        return 0

    cdef long _scan_turn(self, long m) except -1:
        cdef double prev, cur
        cdef long i
        prev = _log_b(m, m, self.t, self.theta)
        self._charge(1)
        i = 0
        while True:
            cur = _log_b(m + i + 1, m, self.t, self.theta)
            self._charge(1)
            if cur < prev:
                return i
            prev = cur
            i += 1

    cdef int _grow_states(self) except -1:
        cdef long newcap = 8 if self._capstates == 0 else 2 * self._capstates
        self._turn = <long *> realloc(self._turn, newcap * sizeof(long))
        self._kinit = <long *> realloc(self._kinit, newcap * sizeof(long))
        self._nterms = <long *> realloc(self._nterms, newcap * sizeof(long))
        self._capterms = <long *> realloc(self._capterms, newcap * sizeof(long))
        self._terms = <double **> realloc(self._terms, newcap * sizeof(double *))
        self._pref = <double **> realloc(self._pref, newcap * sizeof(double *))
        if (self._turn == NULL or self._kinit == NULL or self._nterms == NULL
                or self._capterms == NULL or self._terms == NULL or self._pref == NULL):
            raise MemoryError()
        self._capstates = newcap
        return 0

    cdef int _ensure_state(self, long j) except -1:
        cdef long m, c
        while self._nstates <= j:
            m = self._nstates
            if self._nstates == self._capstates:
                self._grow_states()
            c = self._scan_turn(m)
            self._turn[m] = c
            self._kinit[m] = (c + 1) // 2
            self._terms[m] = NULL
            self._pref[m] = NULL
            self._nterms[m] = 0
            self._capterms[m] = 0
            self._nstates += 1
        return 0

    cdef int _ensure_terms(self, long j, long upto) except -1:
        cdef long i, newcap
        cdef double lb, v
        while self._nterms[j] <= upto:
            i = self._nterms[j]
            if i == self._capterms[j]:
                newcap = 16 if self._capterms[j] == 0 else 2 * self._capterms[j]
                self._terms[j] = <double *> realloc(self._terms[j], newcap * sizeof(double))
                self._pref[j] = <double *> realloc(self._pref[j], newcap * sizeof(double))
                if self._terms[j] == NULL or self._pref[j] == NULL:
                    raise MemoryError()
                self._capterms[j] = newcap
            lb = _log_b(j + i, j, self.t, self.theta)
            self._charge(1)
            v = exp(lb)
            self._terms[j][i] = v
            if i == 0:
                self._pref[j][0] = v
            elif i & 1:
                self._pref[j][i] = self._pref[j][i - 1] - v
            else:
                self._pref[j][i] = self._pref[j][i - 1] + v
            self._nterms[j] = i + 1
        return 0

    cdef int _ensure_ks(self, long m) except -1:
        cdef long newcap
        if m >= self._capks:
            newcap = 8 if self._capks == 0 else 2 * self._capks
            while newcap <= m:
                newcap *= 2
            self._ks = <long *> realloc(self._ks, newcap * sizeof(long))
            if self._ks == NULL:
                raise MemoryError()
            self._capks = newcap
        return 0

    cdef long _classify(self, double u) except -1:
        cdef long m, j, top
        cdef double sm_tot, sp_tot
        self._evals = 0
        self._ensure_state(0)
        self._ensure_ks(0)
        self._ks[0] = self._kinit[0]
        m = 0
        while True:
            while True:
                sm_tot = 0.0
                sp_tot = 0.0
                for j in range(m + 1):
                    top = 2 * self._ks[j] + 1
                    self._ensure_terms(j, top)
                    sm_tot += self._pref[j][top]
                    sp_tot += self._pref[j][top - 1]
                if not (isfinite(sm_tot) and isfinite(sp_tot)):
                    raise NumericalFailure(
                        "alternating-series brackets overflowed for theta=%g, t=%g "
                        "(t is too small for exact sampling)" % (self.theta, self.t)
                    )
                if not (sm_tot < u < sp_tot):
                    break
                for j in range(m + 1):
                    self._ks[j] += 1
            if u <= sm_tot:
                return m
            m += 1
            self._ensure_state(m)
            self._ensure_ks(m)
            self._ks[m] = self._kinit[m]

    def turning_index(self, m):
        """Index offset past which the series terms for q_m decrease."""
        if m < 0:
            raise ValueError("m must be nonnegative")
        self._evals = 0
        self._ensure_state(m)
        return self._turn[m]

    def classify(self, u):
        """Map one uniform u in [0, 1) to a draw of A_infinity(theta, t)."""
        return self._classify(u)

    def sample(self, rng):
        cdef bitgen_t *bg = _bitgen(rng)
        return self._classify(bg.next_double(bg.state))

    def sample_batch(self, size, rng):
        out = np.empty(int(size), dtype=np.int64)
        cdef long long[::1] view = out
        cdef bitgen_t *bg = _bitgen(rng)
        cdef Py_ssize_t i
        for i in range(view.shape[0]):
            view[i] = self._classify(bg.next_double(bg.state))
        return out


cdef class WrightFisherSampler:
    """Exact Wright-Fisher diffusion value at horizon t from any start x0.

    Compiled twin of ``pykern.WrightFisherSampler``.
    """

    cdef readonly double theta1
    cdef readonly double theta2
    cdef readonly double t
    cdef AinftySampler _ainf

    def __init__(self, theta1, theta2, t, max_terms=1_000_000):
        if not (theta1 > 0.0 and theta2 > 0.0):
            raise ValueError(
                "mutation parameters must be positive, got theta1=%r theta2=%r"
                % (theta1, theta2)
            )
        self.theta1 = theta1
        self.theta2 = theta2
        self.t = t
        self._ainf = AinftySampler(self.theta1 + self.theta2, t, max_terms)

    cdef double _sample(self, double x0, bitgen_t *bg) except? -1.0:
        cdef long mm = self._ainf._classify(bg.next_double(bg.state))
        cdef long ll = _binomial(mm, x0, bg)
        return _beta(self.theta1 + ll, self.theta2 + (mm - ll), bg)

    def sample(self, x0, rng):
        if not (0.0 <= x0 <= 1.0):
            raise ValueError("x0 must lie in [0, 1], got %r" % (x0,))
        cdef bitgen_t *bg = _bitgen(rng)
        return self._sample(x0, bg)

    def sample_batch(self, x0, size, rng):
        if not (0.0 <= x0 <= 1.0):
            raise ValueError("x0 must lie in [0, 1], got %r" % (x0,))
        out = np.empty(int(size), dtype=np.float64)
        cdef double[::1] view = out
        cdef bitgen_t *bg = _bitgen(rng)
        cdef Py_ssize_t i
        for i in range(view.shape[0]):
            view[i] = self._sample(x0, bg)
        return out


cdef class SphereBrownianSampler:
    """Exact Brownian-motion increments on S^d for one fixed horizon t.

    Compiled twin of ``pykern.SphereBrownianSampler``.
    """

    cdef readonly long d
    cdef readonly double t
    cdef readonly double theta_half
    cdef AinftySampler _ainf
    cdef double *_buf
    cdef double *_hbuf

    def __cinit__(self, d, t, max_terms=1_000_000):
        if int(d) < 2:
            raise ValueError("exact spherical increments need sphere dimension d >= 2")
        if not (t > 0.0):
            raise ValueError("horizon must be positive, got %r" % (t,))
        self.d = int(d)
        self.t = t
        self.theta_half = 0.5 * self.d
        self._ainf = AinftySampler(<double> self.d, t, max_terms)
        self._buf = <double *> malloc(self.d * sizeof(double))
        self._hbuf = <double *> malloc((self.d + 1) * sizeof(double))
        if self._buf == NULL or self._hbuf == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self._buf)
        free(self._hbuf)

    cdef int _one(self, double[::1] z, double[::1] o, bitgen_t *bg) except -1:
        cdef long d = self.d
        cdef long p = d + 1
        cdef long mm, i
        cdef double y, nrm2, inv, s, hn2, hi, zi, hinv, dot, twod, g1, g2
        # radial coordinate through the Wright-Fisher identity
        mm = self._ainf._classify(bg.next_double(bg.state))
        y = _beta(self.theta_half, self.theta_half + mm, bg)
        # uniform tangential direction in R^d
        while True:
            i = 0
            while i < d:
                _normal_pair(bg, &g1, &g2)
                self._buf[i] = g1
                i += 1
                if i < d:
                    self._buf[i] = g2
                    i += 1
            nrm2 = 0.0
            for i in range(d):
                nrm2 += self._buf[i] * self._buf[i]
            if nrm2 > 1e-300:
                break
        inv = 1.0 / sqrt(nrm2)
        # increment in the north-pole frame: (2 sqrt(y(1-y)) Y, 1 - 2y)
        s = 2.0 * sqrt(y * (1.0 - y))
        for i in range(d):
            o[i] = s * (self._buf[i] * inv)
        o[d] = 1.0 - 2.0 * y
        # reflect the frame onto z: O = I - 2 h h^T with h ∝ e_d - z; near the
        # pole the reflection degenerates and O = I is exact to tolerance
        hn2 = 0.0
        for i in range(p):
            zi = z[i]
            if i == d:
                hi = 1.0 - zi
            else:
                hi = 0.0 - zi
            self._hbuf[i] = hi
            hn2 += hi * hi
        if hn2 >= 1e-24:
            hinv = 1.0 / sqrt(hn2)
            dot = 0.0
            for i in range(p):
                self._hbuf[i] = self._hbuf[i] * hinv
                dot += self._hbuf[i] * o[i]
            twod = 2.0 * dot
            for i in range(p):
                o[i] = o[i] - twod * self._hbuf[i]
        return 0

    def increment(self, z, rng):
        cdef double[::1] zv
        cdef double[::1] ov
        cdef bitgen_t *bg
        z = np.ascontiguousarray(z, dtype=np.float64)
        if z.ndim != 1 or z.shape[0] != self.d + 1:
            raise ValueError(
                "base point must be a length-%d vector, got shape %r" % (self.d + 1, z.shape)
            )
        out = np.empty_like(z)
        zv = z
        ov = out
        bg = _bitgen(rng)
        self._one(zv, ov, bg)
        return out

    def increments(self, base, rng):
        cdef double[:, ::1] bv
        cdef double[:, ::1] ov
        cdef bitgen_t *bg
        cdef Py_ssize_t r
        base = np.ascontiguousarray(base, dtype=np.float64)
        if base.ndim != 2 or base.shape[1] != self.d + 1:
            raise ValueError(
                "base points must be an (n, %d) array, got shape %r" % (self.d + 1, base.shape)
            )
        out = np.empty_like(base)
        bv = base
        ov = out
        bg = _bitgen(rng)
        for r in range(bv.shape[0]):
            self._one(bv[r], ov[r], bg)
        return out
