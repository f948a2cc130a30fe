import math

import numpy as np
import pytest
from scipy import stats

from mutpipe.statsval import (
    FitResult,
    InvalidParametersError,
    UndefinedAssociationError,
    association_summary,
    contingency,
    correlated_binomial_pmf,
    correlated_binomial_pmf_vector,
    ess,
    fit_correlated_binomial,
    g2,
    odds_ratio,
    yules_q,
)


class TestG2:
    def test_zero_mean_deviation_term(self):
        # at y = np the deviation is 0 and g2 = -np(1-p)/(2p(1-p)) = -n/2
        assert g2(5.0, 10, 0.5) == pytest.approx(-5.0)

    def test_matches_direct_formula(self):
        for y, n, p in [(3, 12, 0.25), (0, 7, 0.6), (7, 7, 0.9)]:
            dev = y - n * p
            want = (dev * dev - (1 - 2 * p) * dev - n * p * (1 - p)) / (
                2 * p * (1 - p))
            assert g2(y, n, p) == pytest.approx(want)

    def test_p_domain(self):
        with pytest.raises(ValueError):
            g2(1, 2, 0.0)


class TestCorrelatedBinomialPmf:
    def test_r2_zero_reduces_to_plain_binomial(self):
        n, p = 20, 0.35
        vec = correlated_binomial_pmf_vector(n, p, 0.0)
        want = stats.binom.pmf(np.arange(n + 1), n, p)
        assert np.allclose(vec, want, atol=1e-12)

    def test_normalization_across_parameters(self):
        for n, p, r2 in [(10, 0.5, 0.01), (25, 0.3, 0.002), (50, 0.5, -0.0005),
                         (5, 0.9, 0.005)]:
            vec = correlated_binomial_pmf_vector(n, p, r2)
            assert vec.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(vec >= 0)

    def test_scalar_matches_vector(self):
        n, p, r2 = 15, 0.4, 0.004
        vec = correlated_binomial_pmf_vector(n, p, r2)
        for y in range(n + 1):
            assert correlated_binomial_pmf(y, n, p, r2) == pytest.approx(
                float(vec[y]))

    def test_positive_correlation_fattens_tails(self):
        n, p = 30, 0.5
        base = correlated_binomial_pmf_vector(n, p, 0.0)
        fat = correlated_binomial_pmf_vector(n, p, 0.003)
        assert fat[0] + fat[n] > base[0] + base[n]
        assert fat[n // 2] < base[n // 2]

    def test_validity_region_enforced(self):
        with pytest.raises(InvalidParametersError):
            correlated_binomial_pmf_vector(40, 0.5, 0.5)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            correlated_binomial_pmf(-1, 5, 0.5, 0.0)
        with pytest.raises(ValueError):
            correlated_binomial_pmf(2, 5, 1.0, 0.0)

    def test_bahadur_expansion_identity(self):
        # pmf(y) = binom(y) * (1 + r2 * g2(y))
        n, p, r2 = 12, 0.4, 0.005
        vec = correlated_binomial_pmf_vector(n, p, r2)
        for y in range(n + 1):
            want = stats.binom.pmf(y, n, p) * (1 + r2 * g2(y, n, p))
            assert vec[y] == pytest.approx(want, abs=1e-12)


class TestAssociationMeasures:
    def test_yules_q_known_table(self):
        # ad = 40, bc = 10: Q = 30/50
        assert yules_q(8, 2, 5, 5) == pytest.approx(0.6)

    def test_independence_gives_zero_q_and_unit_or(self):
        # exactly proportional table
        assert yules_q(20, 10, 40, 20) == pytest.approx(0.0)
        assert odds_ratio(20, 10, 40, 20) == pytest.approx(1.0)

    def test_q_or_identity(self):
        # Q = (OR - 1) / (OR + 1) whenever both are defined
        for table in [(8, 2, 5, 5), (1, 9, 3, 7), (50, 5, 10, 35)]:
            q = yules_q(*table)
            orr = odds_ratio(*table)
            assert q == pytest.approx((orr - 1) / (orr + 1))

    def test_perfect_association_is_one(self):
        assert yules_q(10, 0, 5, 10) == pytest.approx(1.0)
        assert yules_q(0, 10, 5, 10) == pytest.approx(-1.0)

    def test_undefined_cases(self):
        with pytest.raises(UndefinedAssociationError):
            yules_q(0, 5, 0, 7)  # ad + bc = 0
        with pytest.raises(UndefinedAssociationError):
            odds_ratio(3, 0, 5, 7)  # bc = 0
        with pytest.raises(ValueError):
            yules_q(-1, 1, 1, 1)

    def test_contingency_counts(self):
        x = [True, True, False, False, True]
        y = [True, False, True, False, True]
        assert contingency(x, y) == (2, 1, 1, 1)

    def test_contingency_length_mismatch(self):
        with pytest.raises(ValueError):
            contingency([True], [True, False])


class TestEss:
    def test_zero_for_identical(self):
        h = np.array([0.2, 0.3, 0.5])
        assert ess(h, h) == 0.0

    def test_simple_value(self):
        assert ess(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 2.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ess(np.zeros(3), np.zeros(4))


class TestFitCorrelatedBinomial:
    def sample_histogram(self, n, p, r2):
        return correlated_binomial_pmf_vector(n, p, r2)

    def test_recovers_planted_parameters(self):
        n, p, r2 = 40, 0.7, 0.0008
        h = self.sample_histogram(n, p, r2)
        fit = fit_correlated_binomial(h)
        assert fit.p == pytest.approx(p, abs=0.002)
        assert fit.r2 == pytest.approx(r2, abs=0.0001)
        assert fit.ess_correlated <= fit.ess_binomial + 1e-15

    def test_uncorrelated_histogram_fits_r2_near_zero(self):
        h = self.sample_histogram(30, 0.5, 0.0)
        fit = fit_correlated_binomial(h)
        assert abs(fit.r2) <= 0.0001 + 1e-12
        assert fit.ess_correlated == pytest.approx(0.0, abs=1e-10)

    def test_correlated_model_beats_binomial_on_correlated_data(self):
        h = self.sample_histogram(50, 0.6, 0.0015)
        fit = fit_correlated_binomial(h)
        assert fit.ess_correlated < fit.ess_binomial

    def test_histogram_validation(self):
        with pytest.raises(ValueError):
            fit_correlated_binomial(np.array([0.5]))
        with pytest.raises(ValueError):
            fit_correlated_binomial(np.array([0.5, 0.7]))  # sums to 1.2

    def test_result_type(self):
        fit = fit_correlated_binomial(self.sample_histogram(10, 0.5, 0.0))
        assert isinstance(fit, FitResult)


class TestAssociationSummary:
    def test_independent_outcomes_center_near_zero(self):
        rng = np.random.default_rng(12)
        outcomes = rng.random((12, 400)) < 0.5
        summary = association_summary(outcomes)
        assert summary["pairs"] == 12 * 11 // 2
        assert abs(summary["yules_q"]["median"]) < 0.15
        assert 0.6 < summary["odds_ratio"]["median"] < 1.6

    def test_perfectly_correlated_outcomes(self):
        row = np.tile([True, False], 50)
        outcomes = np.vstack([row, row, ~row])
        summary = association_summary(outcomes)
        # identical pair: Q = 1 but OR undefined (bc = 0); anti-correlated
        # pairs: Q = -1, OR = 0
        assert summary["yules_q"]["median"] == pytest.approx(-1.0)
        assert summary["odds_ratio"]["median"] == pytest.approx(0.0)

    def test_undefined_pairs_counted(self):
        all_killed = np.ones((3, 10), dtype=bool)
        summary = association_summary(all_killed)
        assert summary["undefined"] == 3
        assert summary["yules_q"] is None
