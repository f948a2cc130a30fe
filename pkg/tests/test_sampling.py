import random
import statistics
from dataclasses import dataclass

import pytest

from mutpipe.intervals import clopper_pearson, wilson
from mutpipe.sampling import (
    MIN_FSCI_SAMPLES,
    FsciResult,
    KillErrorEstimate,
    SamplingConfig,
    estimate_kerr,
    fsci_loop,
    reusable_calibration,
    sample_fixed,
    sample_proportional,
)


@dataclass(frozen=True)
class FakeMutant:
    id: str
    file: str = "a.c"
    function: str = "f"
    killable: bool = False


def population(n, ms, seed=0):
    rng = random.Random(seed)
    flags = [i < round(ms * n) for i in range(n)]
    rng.shuffle(flags)
    return [FakeMutant(id=f"m{i:05d}", killable=k)
            for i, k in enumerate(flags)]


class TestProportionalSampling:
    def test_ratio_one_returns_everything(self):
        pop = population(40, 0.5)
        for by_method in (False, True):
            got = sample_proportional(pop, 1.0, by_method, seed=3)
            assert sorted(m.id for m in got) == sorted(m.id for m in pop)

    def test_per_function_ceiling(self):
        pop = [FakeMutant(id=f"m{i}", function=f"fn{i % 3}")
               for i in range(30)]
        got = sample_proportional(pop, 0.1, by_method=True, seed=1)
        per_fn = {}
        for m in got:
            per_fn[m.function] = per_fn.get(m.function, 0) + 1
        assert per_fn == {"fn0": 1, "fn1": 1, "fn2": 1}

    def test_every_nonempty_stratum_sampled(self):
        pop = [FakeMutant(id=f"m{i}", function=f"fn{i}") for i in range(7)]
        got = sample_proportional(pop, 0.01, by_method=True, seed=0)
        assert {m.function for m in got} == {f"fn{i}" for i in range(7)}

    def test_uniform_count_and_determinism(self):
        pop = population(1000, 0.5)
        a = sample_proportional(pop, 0.05, by_method=False, seed=11)
        b = sample_proportional(pop, 0.05, by_method=False, seed=11)
        c = sample_proportional(pop, 0.05, by_method=False, seed=12)
        assert len(a) == 50
        assert [m.id for m in a] == [m.id for m in b]
        assert [m.id for m in a] != [m.id for m in c]

    def test_invalid_ratio(self):
        with pytest.raises(ValueError):
            sample_proportional(population(10, 0.5), 0.0, False, 0)

    def test_fixed_size(self):
        pop = population(100, 0.5)
        assert len(sample_fixed(pop, 10, 0)) == 10
        assert len(sample_fixed(pop, 500, 0)) == 100


class TestFsciLoop:
    def executor(self):
        return lambda m: m.killable

    def test_degenerate_threshold_stops_at_floor(self):
        pop = population(100, 0.5)
        # any CP interval has width < 2, but the minimum-sample floor holds
        cfg = SamplingConfig(strategy="fsci", t_ci=0.999, seed=5)
        res = fsci_loop(pop, self.executor(), cfg)
        assert res.converged
        assert len(res.sampled) == MIN_FSCI_SAMPLES

    def test_sample_size_range_matches_expected_regime(self):
        # independent bench at 70% kill rate: median run should need a few
        # hundred mutants at a 0.10 interval width
        sizes, errors = [], []
        for seed in range(100):
            pop = population(5000, 0.70, seed=seed)
            cfg = SamplingConfig(strategy="fsci", t_ci=0.10, seed=seed)
            res = fsci_loop(pop, self.executor(), cfg)
            assert res.converged
            sizes.append(len(res.sampled))
            errors.append(abs(res.estimate - 0.70))
        assert 250 <= statistics.median(sizes) <= 450
        assert sum(e <= 0.05 for e in errors) >= 95

    def test_interval_matches_tally(self):
        pop = population(2000, 0.6, seed=2)
        cfg = SamplingConfig(strategy="fsci", t_ci=0.12, seed=2)
        res = fsci_loop(pop, self.executor(), cfg)
        k = res.killed
        n = len(res.sampled)
        ci = clopper_pearson(k, n, cfg.level)
        assert res.interval.lower == pytest.approx(ci.lower)
        assert res.interval.upper == pytest.approx(ci.upper)
        assert res.interval.width < 0.12

    def test_reproducible_for_fixed_seed(self):
        pop = population(2000, 0.5, seed=3)
        cfg = SamplingConfig(strategy="fsci", t_ci=0.15, seed=9)
        a = fsci_loop(pop, self.executor(), cfg)
        b = fsci_loop(pop, self.executor(), cfg)
        assert [(m.id, k) for m, k in a.sampled] == \
               [(m.id, k) for m, k in b.sampled]

    def test_exhaustion_flags_not_converged(self):
        pop = population(30, 0.5, seed=1)
        cfg = SamplingConfig(strategy="fsci", t_ci=0.01, seed=1)
        res = fsci_loop(pop, self.executor(), cfg)
        assert not res.converged
        assert len(res.sampled) == 30

    def test_kerr_widening_applied(self):
        pop = population(4000, 0.7, seed=4)
        kerr = KillErrorEstimate(2, 100, wilson(2, 100))
        cfg = SamplingConfig(strategy="fsci", t_ci=0.20, seed=4)
        plain = fsci_loop(pop, self.executor(), cfg)
        widened = fsci_loop(pop, self.executor(), cfg, kerr=kerr)
        assert not widened.fallback_to_full_suite
        # widened interval contains the unwidened one at the same tally
        assert widened.interval.upper >= plain.interval.upper
        assert len(widened.sampled) >= len(plain.sampled)

    def test_kerr_above_threshold_triggers_fallback(self):
        pop = population(500, 0.7, seed=6)
        bad = KillErrorEstimate(30, 100, wilson(30, 100))
        assert bad.interval.upper > 0.10
        cfg = SamplingConfig(strategy="fsci", t_ci=0.10, seed=6)
        res = fsci_loop(pop, self.executor(), cfg, kerr=bad)
        assert res.fallback_to_full_suite
        # no widening applied: interval equals the plain CP interval
        ci = clopper_pearson(res.killed, len(res.sampled))
        assert res.interval.upper == pytest.approx(ci.upper)

    def test_preexecuted_mutants_not_redrawn(self):
        pop = population(200, 0.5, seed=7)
        pre = [(pop[0], True), (pop[1], False)]
        cfg = SamplingConfig(strategy="fsci", t_ci=0.5, seed=7)
        res = fsci_loop(pop, self.executor(), cfg, preexecuted=pre)
        ids = [m.id for m, _ in res.sampled]
        assert ids.count(pop[0].id) == 1
        assert ids.count(pop[1].id) == 1

    def test_empty_population_raises(self):
        cfg = SamplingConfig(strategy="fsci", seed=0)
        with pytest.raises(ValueError):
            fsci_loop([], self.executor(), cfg)


class TestEstimateKerr:
    def test_identical_suites_no_error(self):
        pop = population(100, 0.6, seed=8)
        full = lambda m: m.killable
        est = estimate_kerr(pop, full, full)
        assert est.observed_errors == 0
        assert est.interval.lower == 0.0

    def test_wilson_contains_point_estimate(self):
        pop = population(100, 1.0 - 1e-9, seed=9)  # all killable
        rng = random.Random(0)
        missed = {m.id for m in pop if rng.random() < 0.03}
        reduced = lambda m: m.killable and m.id not in missed
        est = estimate_kerr(pop, lambda m: m.killable, reduced)
        assert est.observed_errors == len(missed)
        assert est.interval.contains(est.observed_errors / 100)

    def test_monte_carlo_error_rate(self):
        # each full-suite kill missed with prob 0.05: observed error rate
        # converges to 0.05 * true kill rate
        rates = []
        for seed in range(30):
            pop = population(200, 0.7, seed=seed)
            rng = random.Random(seed)
            reduced = lambda m: m.killable and rng.random() >= 0.05
            est = estimate_kerr(pop, lambda m: m.killable, reduced)
            rates.append(est.observed_errors / est.sample_size)
        assert statistics.mean(rates) == pytest.approx(0.05 * 0.7, abs=0.01)

    def test_empty_calibration_rejected(self):
        with pytest.raises(ValueError):
            estimate_kerr([], lambda m: True, lambda m: True)

    def test_reusable_calibration_filters_disagreements(self):
        pop = population(10, 0.5, seed=1)
        reduced = lambda m: False
        est = estimate_kerr(pop, lambda m: m.killable, reduced)
        reuse = reusable_calibration(est)
        assert all(not k for _, k in reuse)
        assert len(reuse) == sum(1 for m in pop if not m.killable)


class TestSamplingConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SamplingConfig(strategy="bogus")
        with pytest.raises(ValueError):
            SamplingConfig(ratio=1.5)
        with pytest.raises(ValueError):
            SamplingConfig(t_ci=0.0)
