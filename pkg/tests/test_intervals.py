import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mutpipe.intervals import ConfidenceInterval, clopper_pearson, wilson


def beta_oracle(k, n, level=0.95):
    # independent oracle: Clopper-Pearson bounds via beta quantiles
    alpha = 1 - level
    lo = 0.0 if k == 0 else stats.beta.ppf(alpha / 2, k, n - k + 1)
    hi = 1.0 if k == n else stats.beta.ppf(1 - alpha / 2, k + 1, n - k)
    return lo, hi


class TestClopperPearson:
    def test_k0_closed_form(self):
        ci = clopper_pearson(0, 10, 0.95)
        assert ci.lower == 0.0
        assert ci.upper == pytest.approx(1 - 0.025 ** (1 / 10), abs=1e-9)

    def test_k_equals_n_boundary(self):
        ci = clopper_pearson(17, 17, 0.95)
        assert ci.upper == 1.0
        assert ci.lower > 0.0

    def test_matches_beta_oracle_150_300(self):
        ci = clopper_pearson(150, 300, 0.95)
        lo, hi = beta_oracle(150, 300)
        assert ci.lower == pytest.approx(lo, abs=1e-9)
        assert ci.upper == pytest.approx(hi, abs=1e-9)

    @pytest.mark.parametrize("k,n", [(1, 7), (5, 10), (3, 50), (49, 50),
                                     (100, 1000), (999, 1000), (0, 1)])
    def test_matches_beta_oracle_grid(self, k, n):
        ci = clopper_pearson(k, n)
        lo, hi = beta_oracle(k, n)
        assert ci.lower == pytest.approx(lo, abs=1e-9)
        assert ci.upper == pytest.approx(hi, abs=1e-9)

    def test_contains_point_estimate(self):
        for k, n in [(0, 5), (2, 9), (7, 7), (33, 100)]:
            ci = clopper_pearson(k, n)
            assert ci.contains(k / n)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            clopper_pearson(5, 0)
        with pytest.raises(ValueError):
            clopper_pearson(-1, 10)
        with pytest.raises(ValueError):
            clopper_pearson(11, 10)
        with pytest.raises(ValueError):
            clopper_pearson(5, 10, level=1.5)

    @given(n=st.integers(1, 300), frac=st.floats(0, 1),
           level=st.sampled_from([0.90, 0.95, 0.99]))
    @settings(max_examples=60, deadline=None)
    def test_oracle_agreement_property(self, n, frac, level):
        k = min(n, int(frac * (n + 1)))
        ci = clopper_pearson(k, n, level)
        lo, hi = beta_oracle(k, n, level)
        assert math.isclose(ci.lower, lo, abs_tol=1e-9)
        assert math.isclose(ci.upper, hi, abs_tol=1e-9)


class TestWilson:
    def test_k0_algebraic_upper(self):
        z = stats.norm.ppf(0.975)
        ci = wilson(0, 100)
        assert ci.lower == 0.0
        assert ci.upper == pytest.approx(z * z / (100 + z * z), abs=1e-12)

    def test_symmetric_center_at_half(self):
        ci = wilson(50, 100)
        assert (ci.lower + ci.upper) / 2 == pytest.approx(0.5)

    def test_contains_point_estimate(self):
        assert wilson(5, 100).contains(0.05)

    def test_matches_statsmodels_style_formula(self):
        # cross-check vs scipy-based reimplementation
        z = stats.norm.ppf(0.975)
        k, n = 13, 77
        p = k / n
        denom = 1 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        margin = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
        ci = wilson(k, n)
        assert ci.lower == pytest.approx(center - margin, abs=1e-12)
        assert ci.upper == pytest.approx(center + margin, abs=1e-12)


class TestInterval:
    def test_width_and_contains(self):
        ci = ConfidenceInterval(0.2, 0.5, 0.95)
        assert ci.width == pytest.approx(0.3)
        assert ci.contains(0.2) and ci.contains(0.5) and not ci.contains(0.51)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            ConfidenceInterval(0.6, 0.4, 0.95)
