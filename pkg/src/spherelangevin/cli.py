"""Command-line entry point.

Four subcommands: solve (Langevin chain plus hyperplane rounding on a
graph file), plan (closed-form parameter prescriptions), validate-sampler
(the statistical battery), and brute (exhaustive small-instance optimum).

Every report is a JSON object with top-level keys {config, seed, results,
provenance, warnings}.  Reports are byte-identical across runs with the
same seed, except for the results.timing subtree, which holds the
timestamp and wall-clock times and is excluded from that contract.

Exit codes: 0 success, 1 a validation test failed, 2 usage or input
error, 3 numeric failure inside the samplers.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from ._kernels import BACKEND_NAME
from .brownian import EXACT, TANGENT_APPROX, IncrementMode
from .errors import GraphFormatError, NumericalFailure
from .geometry import ManifoldShape, random_point
from .langevin import LangevinConfig, run_chain
from .maxcut import bm_cut_report, brute_force_maxcut, load_graph
from .objective import BurerMonteiroObjective, lipschitz_estimates
from .theory import (
    PRACTICAL_PRESET,
    TheoryInputs,
    build_plan,
    lsi_feasibility,
)
from .validation import ACCEPTANCE_CHI_PAIRS, run_sampler_battery
from .wright_fisher import DEFAULT_TOLERANCES, SeriesTolerances

__all__ = ["CliConfig", "main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


@dataclass(frozen=True)
class CliConfig:
    """Fully resolved solve-run configuration, defaults applied."""

    graph_path: str
    d: int
    eta: float
    beta: float
    iterations: int
    seed: int
    gw_samples: int
    record_every: int
    mode_kind: str
    small_t_threshold: float
    report_path: str
    trajectory_csv: str
    preset_used: bool

    def as_dict(self) -> dict:
        return {
            "graph": self.graph_path,
            "d": self.d,
            "eta": self.eta,
            "beta": self.beta,
            "iterations": self.iterations,
            "gw_samples": self.gw_samples,
            "record_every": self.record_every,
            "mode": {"kind": self.mode_kind,
                     "small_t_threshold": self.small_t_threshold},
            "preset_used": self.preset_used,
        }


def _seed_value(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer") from None
    if not (0 <= v < 2 ** 64):
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected a comma-separated list of numbers") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected a comma-separated list of integers") from None


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spherelangevin",
        description="Riemannian Langevin dynamics on products of spheres, "
                    "applied to Max-Cut relaxations.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sol = sub.add_parser("solve", help="run a Langevin chain on a graph "
                                       "and round the result to a cut")
    sol.add_argument("--graph", required=True, help="edge-list file")
    sol.add_argument("--d", type=int, default=3,
                     help="sphere dimension per factor (default 3)")
    sol.add_argument("--eta", type=float, default=None,
                     help="step size (default: practical preset)")
    sol.add_argument("--beta", type=float, default=None,
                     help="inverse temperature (default: practical preset)")
    sol.add_argument("--iters", type=int, default=None,
                     help="iteration count (default: practical preset)")
    sol.add_argument("--seed", type=_seed_value, default=0)
    sol.add_argument("--gw-samples", type=int, default=None,
                     help="rounding hyperplanes (default: practical preset)")
    sol.add_argument("--record-every", type=int, default=None)
    sol.add_argument("--mode", choices=[EXACT, TANGENT_APPROX],
                     default=TANGENT_APPROX)
    sol.add_argument("--small-t-threshold", type=float, default=0.05,
                     help="horizon below which tangent_approx mode switches "
                          "to the Gaussian approximation")
    sol.add_argument("--report", default=None,
                     help="write the JSON report here instead of stdout")
    sol.add_argument("--trajectory-csv", default=None,
                     help="also write the recorded trajectory as CSV")

    pln = sub.add_parser("plan", help="evaluate the parameter prescriptions")
    pln.add_argument("--n", type=int, required=True)
    pln.add_argument("--d", type=int, required=True)
    pln.add_argument("--eps", type=float, required=True)
    pln.add_argument("--delta", type=float, required=True)
    pln.add_argument("--k1", type=float, default=1.0)
    pln.add_argument("--k2", type=float, default=1.0)
    pln.add_argument("--k3", type=float, default=1.0)
    pln.add_argument("--lambda-min", type=float, default=1.0)
    pln.add_argument("--lambda-tilde", type=float, default=1.0)
    pln.add_argument("--h0", type=float, default=10.0)
    pln.add_argument("--alpha-override", type=float, default=None)
    pln.add_argument("--c-f", type=float, default=None,
                     help="Morse constant for the feasibility checklist")
    pln.add_argument("--a", type=float, default=None,
                     help="Lyapunov scale for the feasibility checklist")
    pln.add_argument("--report", default=None)

    val = sub.add_parser("validate-sampler",
                         help="run the statistical sampler battery")
    val.add_argument("--d", type=_int_list, default=[3, 5, 10],
                     help="comma-separated sphere dimensions")
    val.add_argument("--t", type=_float_list, default=[0.1, 0.5, 1.0],
                     help="comma-separated horizons")
    val.add_argument("--samples", type=int, default=100_000)
    val.add_argument("--seed", type=_seed_value, default=0)
    val.add_argument("--significance", type=float, default=0.01)
    val.add_argument("--report", default=None)

    brt = sub.add_parser("brute", help="exact optimum by enumeration")
    brt.add_argument("--graph", required=True)
    brt.add_argument("--report", default=None)
    return parser


def _emit(report, path):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _timing(started, extra=None):
    out = {
        "timestamp_utc": datetime.datetime.now(
            datetime.timezone.utc).isoformat(),
        "total_seconds": time.perf_counter() - started,
    }
    if extra:
        out.update(extra)
    return out


def _load_graph_or_exit(path):
    try:
        return load_graph(path)
    except GraphFormatError as exc:
        print("error: %s: %s" % (path, exc), file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None
    except OSError as exc:
        print("error: cannot read %s: %s" % (path, exc), file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None


def cmd_solve(args) -> int:
    started = time.perf_counter()
    graph = _load_graph_or_exit(args.graph)
    if args.d < 1:
        print("error: --d must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    cfg = CliConfig(
        graph_path=args.graph,
        d=int(args.d),
        eta=float(args.eta if args.eta is not None
                  else PRACTICAL_PRESET["eta"]),
        beta=float(args.beta if args.beta is not None
                   else PRACTICAL_PRESET["beta"]),
        iterations=int(args.iters if args.iters is not None
                       else PRACTICAL_PRESET["iterations"]),
        seed=args.seed,
        gw_samples=int(args.gw_samples if args.gw_samples is not None
                       else PRACTICAL_PRESET["gw_samples"]),
        record_every=int(args.record_every if args.record_every is not None
                         else PRACTICAL_PRESET["record_every"]),
        mode_kind=args.mode,
        small_t_threshold=float(args.small_t_threshold),
        report_path=args.report,
        trajectory_csv=args.trajectory_csv,
        preset_used=(args.eta is None or args.beta is None
                     or args.iters is None),
    )

    shape = ManifoldShape(graph.n, cfg.d)
    cost = graph.cost_matrix()
    objective = BurerMonteiroObjective(cost, shape)
    lip = lipschitz_estimates(cost, shape)
    warnings = []
    if cfg.preset_used:
        warnings.append("one or more of eta/beta/iterations defaulted from "
                        "the practical preset; not covered by the guarantees")

    try:
        mode = IncrementMode(cfg.mode_kind, cfg.small_t_threshold)
        chain_cfg = LangevinConfig(
            eta=cfg.eta, beta=cfg.beta, iterations=cfg.iterations,
            mode=mode, record_every=cfg.record_every)
    except (TypeError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE

    root = np.random.SeedSequence(cfg.seed)
    chain_seq, gw_seq = root.spawn(2)
    chain_rng = np.random.default_rng(chain_seq)
    gw_rng = np.random.default_rng(gw_seq)

    try:
        x0 = random_point(shape, chain_rng)
        report = run_chain(objective, x0, chain_cfg, chain_rng,
                           seed=cfg.seed)
        cut = bm_cut_report(graph, report.best_position, cfg.gw_samples,
                            gw_rng)
    except NumericalFailure as exc:
        print("error: numeric failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC

    if not report.exact_increments:
        warnings.append("increments used the %s path; the run is "
                        "approximate" % report.sampler_path)
    if cut.brute_force_value is None:
        warnings.append("instance too large for the brute-force oracle; "
                        "no optimality ratio reported")

    chain_dict = report.as_dict()
    chain_dict.pop("config", None)
    chain_dict.pop("seed", None)

    out = {
        "config": cfg.as_dict(),
        "seed": cfg.seed,
        "results": {
            "n": graph.n,
            "m": graph.m,
            "chain": chain_dict,
            "cut": cut.as_dict(),
            "lipschitz": {"k1": lip.k1, "k2": lip.k2, "k3": lip.k3,
                          "sigma_max": lip.sigma},
            "timing": _timing(started, {
                "chain_seconds": report.wall_clock_seconds}),
        },
        "provenance": {
            "version": __version__,
            "backend": BACKEND_NAME,
            "objective": "F(x) = -<x, A x> with A = -adjacency; the chain "
                         "minimizes F, the report's quadratic_value is "
                         "<x, A x>",
            "iteration": "geodesic gradient step of size eta, then an "
                         "independent Brownian increment of horizon "
                         "2*eta/beta on every factor",
            "rounding": "best cut over gw_samples random hyperplanes, "
                        "ties to +1",
            "seeding": "one 64-bit seed split into chain and rounding "
                       "streams",
        },
        "warnings": warnings,
    }
    _emit(out, cfg.report_path)

    if cfg.trajectory_csv:
        with open(cfg.trajectory_csv, "w", encoding="utf-8",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "value", "distance_moved"])
            for step, value, dist in report.records:
                writer.writerow([step, repr(value), repr(dist)])
    return EXIT_OK


def cmd_plan(args) -> int:
    started = time.perf_counter()
    try:
        inputs = TheoryInputs(
            n=args.n, d=args.d, eps=args.eps, delta=args.delta,
            K1=args.k1, K2=args.k2, K3=args.k3,
            lambda_min=args.lambda_min, lambda_tilde=args.lambda_tilde,
            H0=args.h0, alpha_override=args.alpha_override)
        plan = build_plan(inputs)
        feasibility = None
        if args.c_f is not None:
            feasibility = [
                {"condition": c.name, "required": c.required,
                 "actual": c.actual, "satisfied": c.satisfied}
                for c in lsi_feasibility(inputs, args.c_f, plan.beta,
                                         a=args.a)
            ]
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE

    results = {
        "beta": plan.beta,
        "alpha": plan.alpha,
        "eta": plan.eta,
        "iterations_k": plan.iterations_k,
        "kl_bound_at_k": plan.kl_bound_at_k,
        "practical_preset": plan.practical_preset,
        "timing": _timing(started),
    }
    if feasibility is not None:
        results["lsi_feasibility"] = feasibility

    out = {
        "config": {
            "n": inputs.n, "d": inputs.d, "eps": inputs.eps,
            "delta": inputs.delta, "K1": inputs.K1, "K2": inputs.K2,
            "K3": inputs.K3, "lambda_min": inputs.lambda_min,
            "lambda_tilde": inputs.lambda_tilde, "H0": inputs.H0,
            "alpha_override": inputs.alpha_override,
            "C_F": args.c_f,
        },
        "seed": None,
        "results": results,
        "provenance": dict(plan.provenance, version=__version__),
        "warnings": list(plan.warnings),
    }
    _emit(out, args.report)
    return EXIT_OK


def cmd_validate_sampler(args) -> int:
    started = time.perf_counter()
    if any(d < 2 for d in args.d):
        print("error: exact sampling needs d >= 2", file=sys.stderr)
        return EXIT_USAGE
    if any(t <= 0 for t in args.t) or args.samples < 2:
        print("error: horizons must be positive and samples >= 2",
              file=sys.stderr)
        return EXIT_USAGE

    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    try:
        checks = run_sampler_battery(
            args.d, args.t, args.samples, rng,
            significance=args.significance)
    except NumericalFailure as exc:
        print("error: numeric failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC

    failed = [c.name for c in checks if not c.passed]
    out = {
        "config": {
            "d": list(args.d), "t": list(args.t),
            "samples": args.samples,
            "significance": args.significance,
        },
        "seed": args.seed,
        "results": {
            "checks": [c.as_dict() for c in checks],
            "passed": len(checks) - len(failed),
            "failed": len(failed),
            "timing": _timing(started),
        },
        "provenance": {
            "version": __version__,
            "backend": BACKEND_NAME,
            "radial-cos-moment": "mean cos r against exp(-d t / 2), "
                                 "two-sided at 3 standard errors",
            "tan-squared-bound": "mean tan^2(r/2) <= 2 d t at 3 standard "
                                 "errors, d >= 3",
            "r-squared-bound": "mean r^2 <= d t at 3 standard errors, "
                               "t <= 1/2",
            "ainfty-pmf-chisquare": "goodness of fit of mixing-variable "
                                    "draws to the series pmf",
            "normalizations": "pmf mass and transition-density integral "
                              "against 1",
        },
        "warnings": ["FAILED: %s" % n for n in failed],
    }
    _emit(out, args.report)
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_brute(args) -> int:
    started = time.perf_counter()
    graph = _load_graph_or_exit(args.graph)
    try:
        cut, value = brute_force_maxcut(graph)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    out = {
        "config": {"graph": args.graph, "n": graph.n, "m": graph.m},
        "seed": None,
        "results": {
            "optimal_value": value,
            "optimal_signs": list(cut.as_tuple()),
            "timing": _timing(started),
        },
        "provenance": {
            "version": __version__,
            "method": "exhaustive enumeration over 2^(n-1) sign patterns "
                      "with vertex 1 fixed",
        },
        "warnings": [],
    }
    _emit(out, args.report)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "solve":
        return cmd_solve(args)
    if args.command == "plan":
        return cmd_plan(args)
    if args.command == "validate-sampler":
        return cmd_validate_sampler(args)
    if args.command == "brute":
        return cmd_brute(args)
    parser.error("unknown command %r" % (args.command,))
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
