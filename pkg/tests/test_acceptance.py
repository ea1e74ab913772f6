"""Acceptance gate: the nine release criteria, one test per criterion.

Run ``pytest -v tests/test_acceptance.py`` to get one pass/fail line per
criterion (a summary block is also printed at the end of the session).
Statistical criteria use fixed seeds; the seeds are the first ones tried,
not searched, so a failure after reseeding means ordinary statistical
flake, not necessarily a regression. Tolerances below are the release
thresholds themselves and must not be loosened without a matching
decision-log entry.
"""

import json
import math
import time

import numpy as np
import pytest

from spherelangevin import (
    GraphInstance,
    IncrementMode,
    LangevinConfig,
    ManifoldShape,
    PRACTICAL_PRESET,
    TheoryInputs,
    brute_force_maxcut,
    bm_cut_report,
    cli,
    exp_map,
    geodesic_distance,
    kl_bound,
    log_map,
    lsi_alpha,
    plan_beta,
    project_to_tangent,
    random_point,
    rgd_baseline,
    run_chain,
)
from spherelangevin.objective import BurerMonteiroObjective, SymmetricCostMatrix
from spherelangevin.validation import ACCEPTANCE_CHI_PAIRS, run_sampler_battery

RADIAL_DS = (3, 5, 10)
RADIAL_TS = (0.1, 0.5, 1.0)
BATTERY_SAMPLES = 100_000

C5 = GraphInstance(5, ((1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (1, 5, 1.0)))
K3 = GraphInstance(3, ((1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)))


@pytest.fixture(scope="module")
def sampler_battery():
    """Full statistical battery, shared by criteria 2-4 (one sampling pass)."""
    rng = np.random.default_rng(42)
    checks = run_sampler_battery(
        RADIAL_DS, RADIAL_TS, BATTERY_SAMPLES, rng,
        chi_pairs=ACCEPTANCE_CHI_PAIRS,
    )
    return {c.name: c for c in checks}


@pytest.fixture(scope="module")
def preset_runs():
    """Langevin-plus-rounding runs on both benchmark instances, 10 seeds each.

    Mirrors the solve command's seeding: one root SeedSequence per seed,
    split into a chain stream and a rounding stream.
    """
    mode = IncrementMode(PRACTICAL_PRESET["mode"])
    cfg = LangevinConfig(
        eta=PRACTICAL_PRESET["eta"],
        beta=PRACTICAL_PRESET["beta"],
        iterations=PRACTICAL_PRESET["iterations"],
        mode=mode,
        record_every=PRACTICAL_PRESET["record_every"],
    )
    started = time.perf_counter()
    out = {}
    for name, graph, d in (("c5", C5, 3), ("k3", K3, 3)):
        shape = ManifoldShape(graph.n, d)
        # rank check for a benign landscape: (d+1)(d+2)/2 must exceed n
        assert (d + 1) * (d + 2) // 2 > graph.n
        objective = BurerMonteiroObjective(graph.cost_matrix(), shape)
        _, brute_val = brute_force_maxcut(graph)
        runs = []
        for seed in range(10):
            chain_seq, gw_seq = np.random.SeedSequence(seed).spawn(2)
            chain_rng = np.random.default_rng(chain_seq)
            x0 = random_point(shape, chain_rng)
            report = run_chain(objective, x0, cfg, chain_rng, seed=seed)
            cut = bm_cut_report(
                graph, report.best_position, PRACTICAL_PRESET["gw_samples"],
                np.random.default_rng(gw_seq),
            )
            runs.append((report, cut))
        out[name] = {"graph": graph, "objective": objective,
                     "brute": brute_val, "runs": runs}
    out["elapsed"] = time.perf_counter() - started
    return out


def test_criterion_01_geometry_suite():
    """10^4 fuzzed (x, v, t): round trip, unit norms, geodesic length."""
    started = time.perf_counter()
    rng = np.random.default_rng(1001)
    worst_round = worst_norm = worst_len = 0.0
    total = 0

    # 99 chunks of 100 independent factors plus 100 scalar calls = 10^4
    for chunk in range(99):
        d = int(rng.integers(2, 11))
        shape = ManifoldShape(100, d)
        x = random_point(shape, rng)
        v = project_to_tangent(x, rng.standard_normal(x.factors.shape))
        # per-factor speeds scaled into (0, 3.0] so t*speed stays off the cut
        # locus while covering the full useful range
        speeds = np.linalg.norm(v.factors, axis=1)
        target = rng.uniform(0.05, 3.0, size=100)
        v = project_to_tangent(x, v.factors * (target / np.maximum(speeds, 1e-300))[:, None])
        t = float(rng.uniform(0.05, 1.0))

        y = exp_map(x, v, t)
        back = log_map(x, y)
        worst_round = max(worst_round, float(np.abs(back.factors - t * v.factors).max()))
        worst_norm = max(
            worst_norm, float(np.abs(np.linalg.norm(y.factors, axis=1) - 1.0).max())
        )
        worst_len = max(worst_len, abs(geodesic_distance(x, y) - t * v.norm()))
        total += 100

    for _ in range(100):
        shape = ManifoldShape(int(rng.integers(1, 5)), int(rng.integers(2, 8)))
        x = random_point(shape, rng)
        v = project_to_tangent(x, rng.standard_normal(x.factors.shape))
        norms = v.factor_norms()
        v = v.scaled(float(rng.uniform(0.1, 2.9)) / max(float(norms.max()), 1e-300))
        t = float(rng.uniform(0.05, 1.0))
        y = exp_map(x, v, t)
        back = log_map(x, y)
        worst_round = max(worst_round, float(np.abs(back.factors - t * v.factors).max()))
        worst_norm = max(
            worst_norm, float(np.abs(np.linalg.norm(y.factors, axis=1) - 1.0).max())
        )
        worst_len = max(worst_len, abs(geodesic_distance(x, y) - t * v.norm()))
        total += 1

    elapsed = time.perf_counter() - started
    print(
        "criterion 1: %d triples, round-trip %.3e (<=1e-8), norm %.3e (<=1e-10), "
        "length %.3e (<=1e-9), %.2fs (<10s)"
        % (total, worst_round, worst_norm, worst_len, elapsed)
    )
    assert total == 10_000
    assert worst_round <= 1e-8
    assert worst_norm <= 1e-10
    assert worst_len <= 1e-9
    assert elapsed < 10.0


def test_criterion_02_radial_cos_moment(sampler_battery):
    """|mean cos r - exp(-dt/2)| <= 3 SE over d in {3,5,10}, t in {0.1,0.5,1}."""
    for d in RADIAL_DS:
        for t in RADIAL_TS:
            c = sampler_battery["radial-cos-moment d=%d t=%g" % (d, t)]
            print(
                "criterion 2: d=%d t=%.1f observed %.5f target %.5f (%.2f SE)"
                % (d, t, c.observed, c.reference, c.detail["deviation_in_se"])
            )
            assert c.detail["samples"] == BATTERY_SAMPLES
            assert c.passed, "cos moment off at d=%d t=%g: %r" % (d, t, c)


def test_criterion_03_tan_and_r_squared_bounds(sampler_battery):
    """mean tan^2(r/2) <= 2dt + 3 SE and mean r^2 <= dt + 3 SE at d in {3,5}."""
    seen_tan = seen_r2 = 0
    for d in (3, 5):
        for t in RADIAL_TS:
            c = sampler_battery["tan-squared-bound d=%d t=%g" % (d, t)]
            print(
                "criterion 3: tan^2 d=%d t=%.1f observed %.4f bound %.4f"
                % (d, t, c.observed, c.reference)
            )
            assert c.passed
            seen_tan += 1
            if t <= 0.5:  # the r^2 comparison only holds on short horizons
                c2 = sampler_battery["r-squared-bound d=%d t=%g" % (d, t)]
                print(
                    "criterion 3: r^2   d=%d t=%.1f observed %.4f bound %.4f"
                    % (d, t, c2.observed, c2.reference)
                )
                assert c2.passed
                seen_r2 += 1
    assert seen_tan == 6 and seen_r2 == 4


def test_criterion_04_sampler_series_agreement(sampler_battery):
    """Chi-square GOF at significance 0.01 plus both normalization checks."""
    for theta, t in ACCEPTANCE_CHI_PAIRS:
        chi = sampler_battery["ainfty-pmf-chisquare theta=%g t=%g" % (theta, t)]
        print(
            "criterion 4: chi-square theta=%g t=%g p=%.3f (>=0.01), %d bins"
            % (theta, t, chi.observed, chi.detail["bins"])
        )
        assert chi.detail["samples"] == BATTERY_SAMPLES
        assert chi.passed and chi.observed >= 0.01
        qm = sampler_battery["qm-normalization theta=%g t=%g" % (theta, t)]
        print("criterion 4: qm mass theta=%g t=%g = %.8f (1 +/- 1e-4)" % (theta, t, qm.observed))
        assert qm.passed and abs(qm.observed - 1.0) <= 1e-4
    for d in RADIAL_DS:
        for t in RADIAL_TS:
            dens = sampler_battery["wf-density-normalization d=%d t=%g" % (d, t)]
            assert dens.passed and abs(dens.observed - 1.0) <= 1e-3
    print("criterion 4: all density integrals within 1e-3 of 1")


def test_criterion_05_gradient_correctness():
    """10^3 random (A, x, v): finite differences vs <grad, v>, and tangency."""
    rng = np.random.default_rng(555)
    h = 1e-5
    worst_rel = worst_radial = 0.0
    trials = 0
    while trials < 1000:
        n = int(rng.integers(2, 7))
        d = int(rng.integers(2, 5))
        entries = []
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                if rng.random() < 0.6:
                    entries.append((i, j, float(rng.uniform(-1.0, 1.0))))
        if not entries:
            continue
        shape = ManifoldShape(n, d)
        obj = BurerMonteiroObjective(SymmetricCostMatrix(n, entries), shape)
        x = random_point(shape, rng)
        w = rng.standard_normal(x.factors.shape)
        v = project_to_tangent(x, w)
        if v.norm() < 1e-6:
            continue

        g = obj.riemannian_gradient(x)
        worst_radial = max(
            worst_radial, float(np.abs(np.sum(g.factors * x.factors, axis=1)).max())
        )
        ip = float(np.sum(g.factors * v.factors))
        neg = project_to_tangent(x, -w)
        fd = (obj.value(exp_map(x, v, h)) - obj.value(exp_map(x, neg, h))) / (2.0 * h)
        worst_rel = max(worst_rel, abs(fd - ip) / max(1.0, abs(ip)))
        trials += 1

    print(
        "criterion 5: %d triples, FD relative error %.3e (<=1e-6), "
        "tangency %.3e (<=1e-10)" % (trials, worst_rel, worst_radial)
    )
    assert worst_rel <= 1e-6
    assert worst_radial <= 1e-10


def test_criterion_06_end_to_end_optimization(preset_runs):
    """Preset chain + 64-sample rounding: >=9/10 optimum hits, all >=0.878x."""
    for name in ("c5", "k3"):
        data = preset_runs[name]
        hits = sum(1 for _, cut in data["runs"] if cut.cut_weight == data["brute"])
        ratios = [cut.ratio_to_optimum for _, cut in data["runs"]]
        print(
            "criterion 6: %s optimum %.0f, hits %d/10, min ratio %.4f, %.1fs"
            % (name, data["brute"], hits, min(ratios), preset_runs["elapsed"])
        )
        assert hits >= 9, "%s: only %d/10 seeds reached the optimum" % (name, hits)
        assert all(r >= 0.878 for r in ratios)
    assert preset_runs["elapsed"] < 60.0


def test_criterion_07_baseline_agreement(preset_runs):
    """Riemannian GD reaches the same quadratic value as the best chain state."""
    for name in ("c5", "k3"):
        data = preset_runs[name]
        obj = data["objective"]
        worst = 0.0
        for seed, (report, _) in enumerate(data["runs"]):
            chain_seq, _ = np.random.SeedSequence(seed).spawn(2)
            x0 = random_point(obj.shape, np.random.default_rng(chain_seq))
            # 1e-7 gradient norm bounds the value error far below the 1e-3
            # criterion; the triangle objective has flat directions that keep
            # tighter tolerances from terminating
            _, rgd_val = rgd_baseline(obj, x0, step=0.05, grad_tol=1e-7)
            worst = max(worst, abs(-report.best_value - (-rgd_val)))
        print("criterion 7: %s max |chain quad - rgd quad| = %.2e (<=1e-3)" % (name, worst))
        assert worst <= 1e-3


def test_criterion_08_planner_formula_fidelity():
    """Pinned closed-form planner values, recomputed independently beforehand."""
    beta = plan_beta(TheoryInputs(n=10, d=5, eps=0.5, delta=0.1))
    assert abs(beta - 300.0 * math.log(200.0)) <= 1e-9 * abs(beta)
    print("criterion 8: plan_beta = %.13f == 300 ln 200 (rel 1e-9)" % beta)

    alpha = lsi_alpha(TheoryInputs(n=2, d=5, eps=0.5, delta=0.1), beta=10.0)
    assert alpha == pytest.approx(1.0 / 67900.0, rel=1e-12)
    print("criterion 8: lsi_alpha = %.6e == 1/67900 (rel 1e-12)" % alpha)

    val, notes = kl_bound(k=1, eta=1.0, alpha=1.0, beta=1.0, n=1, d=1,
                          K1=1.0, K2=1.0, H0=1.0)
    assert val == pytest.approx(math.exp(-1.0) + 22.0, rel=1e-12)
    assert notes == ()
    val0, _ = kl_bound(k=0, eta=1.0, alpha=1.0, beta=1.0, n=1, d=1,
                       K1=1.0, K2=1.0, H0=1.0)
    assert val0 == pytest.approx(23.0, rel=1e-12)
    val_inf, _ = kl_bound(k=100_000, eta=1.0, alpha=1.0, beta=1.0, n=1, d=1,
                          K1=1.0, K2=1.0, H0=1.0)
    assert val_inf == pytest.approx(22.0, rel=1e-12)
    print("criterion 8: kl_bound examples match hand arithmetic (rel 1e-12)")


def test_criterion_09_determinism(tmp_path, capsys):
    """Two identical solve invocations differ only inside results.timing."""
    graph = tmp_path / "c5.txt"
    graph.write_text("5 5\n1 2 1\n1 5 1\n2 3 1\n3 4 1\n4 5 1\n")
    paths = [tmp_path / "run1.json", tmp_path / "run2.json"]
    for p in paths:
        code = cli.main([
            "solve", "--graph", str(graph), "--eta", "0.02", "--beta", "1000",
            "--iters", "300", "--seed", "7", "--report", str(p),
        ])
        assert code == cli.EXIT_OK
    raw1, raw2 = (p.read_text() for p in paths)

    # every differing line must sit inside the timing block
    diff_lines = [
        (a, b) for a, b in zip(raw1.splitlines(), raw2.splitlines()) if a != b
    ]
    timing_keys = ("timestamp_utc", "total_seconds", "chain_seconds")
    assert all(any(k in a for k in timing_keys) for a, _ in diff_lines)
    assert len(raw1.splitlines()) == len(raw2.splitlines())

    # and after dropping that subtree the canonical forms are byte-identical
    rep1, rep2 = json.loads(raw1), json.loads(raw2)
    t1 = rep1["results"].pop("timing")
    t2 = rep2["results"].pop("timing")
    assert set(t1) == set(t2) == set(timing_keys)
    blob1 = json.dumps(rep1, indent=2, sort_keys=True)
    blob2 = json.dumps(rep2, indent=2, sort_keys=True)
    assert blob1 == blob2
    print(
        "criterion 9: reports byte-identical outside results.timing "
        "(%d differing timing lines)" % len(diff_lines)
    )
