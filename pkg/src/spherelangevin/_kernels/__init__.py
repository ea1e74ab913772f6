"""Sampler kernel backends.

Two interchangeable implementations of the hot sampling loops live here: the
compiled Cython module ``_cykern`` and the pure-Python reference ``pykern``.
Both consume the identical uniform stream from a numpy Generator and return
bit-identical draws; the test suite enforces this, so which one is active
never changes results, only speed.

Selection happens once at import time: the compiled module when it built,
otherwise the pure-Python fallback. Set ``SPHERELANGEVIN_BACKEND`` to
``cython`` or ``python`` to force a choice (forcing ``cython`` on an install
without the extension raises).
"""

import os

from . import pykern

_choice = os.environ.get("SPHERELANGEVIN_BACKEND", "auto").strip().lower()

if _choice in ("", "auto"):
    try:
        from . import _cykern as _impl
    except ImportError:
        _impl = pykern
elif _choice in ("cython", "c", "compiled"):
    from . import _cykern as _impl
elif _choice in ("python", "py", "pure"):
    _impl = pykern
else:
    raise ValueError(
        "SPHERELANGEVIN_BACKEND=%r not understood; use 'auto', 'cython' or 'python'"
        % (_choice,)
    )

BACKEND_NAME = _impl.BACKEND_NAME

log_coefficient_a = _impl.log_coefficient_a
log_coefficient_b = _impl.log_coefficient_b
normal_sample = _impl.normal_sample
gamma_sample = _impl.gamma_sample
beta_sample = _impl.beta_sample
binomial_sample = _impl.binomial_sample
AinftySampler = _impl.AinftySampler
WrightFisherSampler = _impl.WrightFisherSampler
SphereBrownianSampler = _impl.SphereBrownianSampler


def active_backend():
    """Name of the kernel backend selected at import time."""
    return BACKEND_NAME
