"""Benchmark the compiled sampler kernels against the pure-Python fallback.

Both backends consume the identical uniform stream, so before timing each
kernel the script checks the outputs are bit-identical; a benchmark between
implementations that disagree would be meaningless. Timings are best-of-N
wall clock on freshly seeded generators.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --size 200000 --repeats 5
"""

import argparse
import time

import numpy as np

from spherelangevin._kernels import pykern

try:
    from spherelangevin._kernels import _cykern
except ImportError:
    _cykern = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_one(name, make_fn, repeats):
    """Time one kernel under both backends and cross-check the draws."""
    py_draws, py_fn = make_fn(pykern)
    rows = {"kernel": name, "python_s": best_of(py_fn, repeats)}
    if _cykern is not None:
        cy_draws, cy_fn = make_fn(_cykern)
        if not np.array_equal(py_draws, cy_draws):
            raise AssertionError("backends disagree on kernel %r" % name)
        rows["cython_s"] = best_of(cy_fn, repeats)
        rows["speedup"] = rows["python_s"] / rows["cython_s"]
    return rows


def make_ainfty(size, theta, t):
    def make(impl):
        sampler = impl.AinftySampler(theta, t)
        draws = sampler.sample_batch(size, np.random.default_rng(7))

        def run():
            sampler.sample_batch(size, np.random.default_rng(7))

        return draws, run

    return make


def make_wright_fisher(size, d, t):
    def make(impl):
        sampler = impl.WrightFisherSampler(d / 2.0, d / 2.0, t)
        draws = sampler.sample_batch(0.0, size, np.random.default_rng(7))

        def run():
            sampler.sample_batch(0.0, size, np.random.default_rng(7))

        return draws, run

    return make


def make_increments(size, d, t):
    base = np.zeros((size, d + 1))
    base[:, 0] = 1.0

    def make(impl):
        sampler = impl.SphereBrownianSampler(d, t)
        draws = sampler.increments(base, np.random.default_rng(7))

        def run():
            sampler.increments(base, np.random.default_rng(7))

        return draws, run

    return make


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=50_000,
                        help="draws per kernel per timing (default 50000)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repetitions, best is reported (default 3)")
    parser.add_argument("--theta", type=float, default=3.0)
    parser.add_argument("--t", type=float, default=0.5, dest="t",
                        help="diffusion time for every kernel (default 0.5)")
    parser.add_argument("--d", type=int, default=3,
                        help="sphere dimension for the geometric kernels")
    args = parser.parse_args(argv)
    if args.size < 1 or args.repeats < 1:
        parser.error("--size and --repeats must be positive")

    if _cykern is None:
        print("compiled backend not built; timing the pure-Python kernels only")

    cases = [
        ("ainfty mixture index", make_ainfty(args.size, args.theta, args.t)),
        ("wright-fisher radial", make_wright_fisher(args.size, args.d, args.t)),
        ("sphere increments", make_increments(args.size, args.d, args.t)),
    ]
    results = [bench_one(name, make_fn, args.repeats) for name, make_fn in cases]

    header = "%-22s %12s %12s %9s" % ("kernel", "python [s]", "cython [s]", "speedup")
    print(header)
    print("-" * len(header))
    for row in results:
        if "cython_s" in row:
            print("%-22s %12.4f %12.4f %8.1fx" % (
                row["kernel"], row["python_s"], row["cython_s"], row["speedup"]))
        else:
            print("%-22s %12.4f %12s %9s" % (row["kernel"], row["python_s"], "-", "-"))
    print("\n%d draws per kernel, best of %d runs, theta=%g, t=%g, d=%d"
          % (args.size, args.repeats, args.theta, args.t, args.d))


if __name__ == "__main__":
    main()
