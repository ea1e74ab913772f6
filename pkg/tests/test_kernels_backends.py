"""Compiled and pure-Python kernels must be interchangeable bit for bit.

Both backends consume uniforms from the same PCG64 generator in the same
order, so identical seeds must give identical doubles, not merely close ones.
If the compiled extension is missing the comparisons are skipped and only the
pure backend's self-consistency runs.
"""

import numpy as np
import pytest

from spherelangevin import _kernels
from spherelangevin import (
    EXACT_MODE,
    TANGENT_MODE,
    IncrementMode,
    ManifoldShape,
    ProductBrownian,
    random_point,
)
from spherelangevin._kernels import pykern

cykern = _kernels._cykern
needs_cython = pytest.mark.skipif(cykern is None, reason="compiled backend not built")


def test_active_backend_is_reported():
    assert _kernels.active_backend() in ("cython", "python")
    if cykern is not None:
        assert _kernels.active_backend() == "cython"


@needs_cython
@pytest.mark.parametrize("a", [0.3, 1.0, 1.5, 7.25])
def test_gamma_sample_bitwise(a):
    r1, r2 = np.random.default_rng(5), np.random.default_rng(5)
    for _ in range(200):
        assert pykern.gamma_sample(a, r1) == cykern.gamma_sample(a, r2)


@needs_cython
@pytest.mark.parametrize("a,b", [(1.5, 1.5), (0.5, 2.5), (3.0, 1.0)])
def test_beta_sample_bitwise(a, b):
    r1, r2 = np.random.default_rng(6), np.random.default_rng(6)
    for _ in range(200):
        assert pykern.beta_sample(a, b, r1) == cykern.beta_sample(a, b, r2)


@needs_cython
def test_binomial_and_normal_bitwise():
    r1, r2 = np.random.default_rng(7), np.random.default_rng(7)
    for _ in range(200):
        assert pykern.binomial_sample(17, 0.3, r1) == cykern.binomial_sample(17, 0.3, r2)
    r1, r2 = np.random.default_rng(8), np.random.default_rng(8)
    for _ in range(200):
        assert pykern.normal_sample(r1) == cykern.normal_sample(r2)


@needs_cython
@pytest.mark.parametrize("theta,t", [(1.5, 0.5), (3.0, 0.2), (5.0, 1.0)])
def test_ainfty_sampler_bitwise(theta, t):
    sp = pykern.AinftySampler(theta, t)
    sc = cykern.AinftySampler(theta, t)
    a = sp.sample_batch(500, np.random.default_rng(9))
    b = sc.sample_batch(500, np.random.default_rng(9))
    assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_cython
def test_log_coefficients_bitwise():
    for k in range(0, 40, 3):
        for m in (0, 1, 5):
            if k < m:
                continue
            assert pykern.log_coefficient_a(k, m, 2.5) == cykern.log_coefficient_a(k, m, 2.5)
            assert pykern.log_coefficient_b(k, m, 0.7, 2.5) == cykern.log_coefficient_b(
                k, m, 0.7, 2.5
            )


@needs_cython
@pytest.mark.parametrize("x0", [0.0, 0.3, 1.0])
def test_wright_fisher_sampler_bitwise(x0):
    sp = pykern.WrightFisherSampler(1.5, 1.5, 0.4)
    sc = cykern.WrightFisherSampler(1.5, 1.5, 0.4)
    a = sp.sample_batch(x0, 400, np.random.default_rng(10))
    b = sc.sample_batch(x0, 400, np.random.default_rng(10))
    assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_cython
def test_sphere_increments_bitwise():
    d, t = 3, 0.4
    base = np.zeros(d + 1)
    base[-1] = 1.0
    sp = pykern.SphereBrownianSampler(d, t)
    sc = cykern.SphereBrownianSampler(d, t)
    a = sp.increments(np.tile(base, (200, 1)), np.random.default_rng(12))
    b = sc.increments(np.tile(base, (200, 1)), np.random.default_rng(12))
    assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_cython
def test_sphere_increments_bitwise_at_scale():
    # Regression guard: gcc used to fuse the Box-Muller cos/sin pair into
    # one glibc sincos() call, which rounds differently from the separate
    # calls on roughly 1 in 1500 angles.  A couple hundred rows pass that
    # by luck; ten thousand rows cannot (miss probability under 1e-6), so
    # this catches the fusion coming back if the build flags are lost.
    d, t = 3, 0.5
    n = 10_000
    rng = np.random.default_rng(7)
    base = np.zeros((n, d + 1))
    base[:, 0] = 1.0
    g = rng.standard_normal((n // 2, d + 1))
    base[: n // 2] = g / np.linalg.norm(g, axis=1, keepdims=True)
    a = pykern.SphereBrownianSampler(d, t).increments(base, np.random.default_rng(7))
    b = cykern.SphereBrownianSampler(d, t).increments(base, np.random.default_rng(7))
    neq = int(np.sum(~np.all(np.asarray(a) == np.asarray(b), axis=1)))
    assert neq == 0, "%d of %d rows differ between backends" % (neq, n)


# Names the library looks up on the _kernels module at call time; patching
# them swaps the backend under everything built on top.
FORWARDED = (
    "AinftySampler",
    "WrightFisherSampler",
    "SphereBrownianSampler",
    "log_coefficient_a",
    "log_coefficient_b",
    "normal_sample",
    "gamma_sample",
    "beta_sample",
    "binomial_sample",
)


def _use_backend(monkeypatch, impl):
    for name in FORWARDED:
        monkeypatch.setattr(_kernels, name, getattr(impl, name))


@needs_cython
@pytest.mark.parametrize(
    "t,mode",
    [
        (0.4, EXACT_MODE),                 # exact alternating-series path
        (0.01, EXACT_MODE),                # small-t discrete-normal mixture path
        (0.01, TANGENT_MODE),              # projected-Gaussian path
    ],
)
def test_product_step_bitwise_across_backends(t, mode, monkeypatch):
    """Full product-manifold Brownian steps agree on every dispatch path."""
    shape = ManifoldShape(4, 3)
    x = random_point(shape, np.random.default_rng(1))

    # the exact-series stepper binds its kernel sampler at construction, so
    # build one per backend
    _use_backend(monkeypatch, pykern)
    a = ProductBrownian(shape, t, mode=mode).step(x, np.random.default_rng(33))
    _use_backend(monkeypatch, cykern)
    b = ProductBrownian(shape, t, mode=mode).step(x, np.random.default_rng(33))
    assert np.array_equal(a.factors, b.factors)
    # the step must actually move the point
    assert not np.array_equal(a.factors, x.factors)


def test_pure_backend_is_self_consistent():
    s = pykern.AinftySampler(3.0, 0.5)
    a = s.sample_batch(100, np.random.default_rng(2))
    b = s.sample_batch(100, np.random.default_rng(2))
    assert np.array_equal(np.asarray(a), np.asarray(b))


def test_backend_env_override(tmp_path):
    """SPHERELANGEVIN_BACKEND=python forces the fallback in a fresh process."""
    import subprocess
    import sys

    code = (
        "import spherelangevin as sl; print(sl.active_backend())"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "SPHERELANGEVIN_BACKEND": "python"},
        check=True,
    )
    assert out.stdout.strip() == "python"
