"""Statistical check helpers used by the sampler validation battery.

Unit-level runs use reduced sample counts; the acceptance suite runs the
full battery at its stated sizes.
"""

import numpy as np
import pytest

from spherelangevin import qm_pmf
from spherelangevin import validation as va
from spherelangevin.validation import ACCEPTANCE_CHI_PAIRS


class TestRadialChecks:
    def test_all_pass_at_reference_settings(self):
        rng = np.random.default_rng(42)
        checks = va.radial_checks(3, 0.5, 20_000, rng)
        names = [c.name for c in checks]
        assert len(checks) == 3
        assert all(c.passed for c in checks)
        assert any("cos-moment" in n for n in names)
        assert any("tan-squared" in n for n in names)
        assert any("r-squared" in n for n in names)

    def test_cos_moment_detail_reports_se_units(self):
        rng = np.random.default_rng(42)
        cos_check = va.radial_checks(5, 1.0, 10_000, rng)[0]
        assert "deviation_in_se" in cos_check.detail
        assert cos_check.detail["deviation_in_se"] <= 3.0
        assert cos_check.detail["samples"] == 10_000

    def test_tan_bound_needs_d_at_least_three(self):
        rng = np.random.default_rng(1)
        checks = va.radial_checks(2, 0.5, 5_000, rng)
        # the tangent-squared bound only holds from dimension three up, so
        # the battery must drop it rather than report a fake pass
        assert not any("tan-squared" in c.name for c in checks)
        assert any("cos-moment" in c.name for c in checks)

    def test_r_squared_bound_dropped_for_long_horizons(self):
        rng = np.random.default_rng(2)
        checks = va.radial_checks(3, 1.0, 5_000, rng)
        assert not any("r-squared" in c.name for c in checks)

    def test_as_dict_round_trip(self):
        rng = np.random.default_rng(3)
        c = va.radial_checks(3, 0.5, 2_000, rng)[0]
        d = c.as_dict()
        assert d["name"] == c.name
        assert d["passed"] is c.passed
        assert d["observed"] == c.observed


class TestChiSquare:
    def test_merged_bins_conserve_total_mass(self):
        theta, t, n = 3.0, 0.5, 50_000
        edges, expected = va._merged_expected(theta, t, 25, n, va.DEFAULT_TOLERANCES)
        assert expected.sum() == pytest.approx(n, abs=1e-6)
        assert all(expected >= 5.0)
        # bins are consecutive, start at zero, and the last one is open-ended
        assert edges[0][0] == 0
        assert edges[-1][1] is None
        for (lo, up), (lo2, _) in zip(edges, edges[1:]):
            assert lo2 == up + 1

    def test_gof_passes_on_true_samples(self):
        c = va.pmf_chisquare_check(3.0, 0.5, 30_000, np.random.default_rng(1))
        assert c.passed
        assert c.observed >= 0.01  # the p-value
        assert c.detail["bins"] >= 3

    def test_gof_rejects_wrong_distribution(self):
        # feed draws from a visibly different horizon; the test must fail
        import scipy.stats

        from spherelangevin import sample_ainfty_batch

        n = 30_000
        draws = sample_ainfty_batch(3.0, 1.5, n, rng=np.random.default_rng(5))
        hi = int(draws.max())
        counts = np.bincount(draws, minlength=hi + 1).astype(float)
        edges, expected = va._merged_expected(3.0, 0.5, hi, n, va.DEFAULT_TOLERANCES)
        observed = np.array(
            [counts[lo:].sum() if up is None else counts[lo : up + 1].sum()
             for lo, up in edges]
        )
        _, p = scipy.stats.chisquare(observed, expected)
        assert p < 0.01


class TestNormalization:
    @pytest.mark.parametrize("theta,t", ACCEPTANCE_CHI_PAIRS)
    def test_qm_mass(self, theta, t):
        c = va.qm_normalization_check(theta, t)
        assert c.passed
        assert abs(c.observed - 1.0) <= 1e-4

    @pytest.mark.parametrize("d,t", [(3, 0.5), (5, 1.0)])
    def test_density_integral(self, d, t):
        c = va.density_normalization_check(d, t)
        assert c.passed
        assert abs(c.observed - 1.0) <= 1e-3


class TestBattery:
    def test_small_battery_passes_and_covers_all_kinds(self):
        rng = np.random.default_rng(42)
        checks = va.run_sampler_battery((3,), (0.5,), 10_000, rng)
        kinds = {c.name.split(" ")[0] for c in checks}
        assert {"radial-cos-moment", "tan-squared-bound", "r-squared-bound",
                "wf-density-normalization", "ainfty-pmf-chisquare",
                "qm-normalization"} <= kinds
        assert all(c.passed for c in checks)
