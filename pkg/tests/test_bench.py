import numpy as np
import pytest

from mutpipe.bench import (
    PRESETS,
    BenchSpec,
    InfeasibleSpecError,
    generate_bench,
    read_bundle,
    true_score,
    write_bundle,
)
from mutpipe.statsval import association_summary


def small_spec(**kw):
    base = dict(n_mutants=120, n_tests=12, n_files=2, statements_per_file=20)
    base.update(kw)
    return BenchSpec(**base)


class TestGenerateBench:
    def test_exact_ground_truth_score(self):
        spec = small_spec(true_ms=0.7)
        bench = generate_bench(spec, seed=1)
        assert true_score(bench) == pytest.approx(round(0.7 * 120) / 120)

    def test_killable_mutants_are_killed_by_full_suite(self):
        bench = generate_bench(small_spec(), seed=2)
        all_tests = [t.id for t in bench.tests]
        for m in bench.mutants:
            assert bench.matrix.killed_by_any(m.id, all_tests) == m.killable

    def test_killers_cover_the_mutated_statement(self):
        bench = generate_bench(small_spec(), seed=3)
        for (mid, tid) in bench.matrix.outcomes:
            m = next(x for x in bench.mutants if x.id == mid)
            cov = bench.coverage_for_file(m.file)[tid]
            assert cov.count_at(m.statement_id) > 0

    def test_deterministic_per_seed(self):
        a = generate_bench(small_spec(), seed=9)
        b = generate_bench(small_spec(), seed=9)
        assert a.matrix.outcomes == b.matrix.outcomes
        assert [m.id for m in a.mutants] == [m.id for m in b.mutants]
        c = generate_bench(small_spec(), seed=10)
        assert a.matrix.outcomes != c.matrix.outcomes

    def test_live_equiv_fraction_produces_identical_coverage(self):
        bench = generate_bench(
            small_spec(live_equiv_fraction=1.0, perturbation_prob=1.0), seed=4)
        for m in bench.mutants:
            if m.killable:
                continue
            orig = bench.coverage_for_file(m.file)
            for tid, vec in bench.mutant_coverage(m.id).items():
                assert vec.counts == orig[tid].counts

    def test_max_count_killer_bias(self):
        bench = generate_bench(small_spec(killer_bias="max-count"), seed=5)
        for m in bench.mutants:
            if not m.killable:
                continue
            orig = bench.coverage_for_file(m.file)
            covering = [t for t in orig if orig[t].count_at(m.statement_id) > 0]
            best = max(covering, key=lambda t: orig[t].count_at(m.statement_id))
            assert bench.matrix.outcome(m.id, best) != "pass"

    def test_infeasible_specs_rejected(self):
        with pytest.raises(InfeasibleSpecError):
            BenchSpec(true_ms=0.0)
        with pytest.raises(InfeasibleSpecError):
            BenchSpec(killer_bias="weird")
        with pytest.raises(InfeasibleSpecError):
            generate_bench(BenchSpec(n_mutants=3, true_ms=0.01), seed=0)

    def test_presets_exist(self):
        assert PRESETS["mlfs-like"]["true_ms"] == pytest.approx(0.8182)
        assert PRESETS["default"]["true_ms"] == pytest.approx(0.70)

    def test_uncorrelated_outcomes_have_centered_association(self):
        # sample kill outcomes of killable mutants across tests: with no
        # planted correlation the pairwise Yule's Q distribution straddles 0
        bench = generate_bench(
            BenchSpec(n_mutants=60, n_tests=120, n_files=1,
                      statements_per_file=30, correlation=0.0), seed=6)
        killable = [m for m in bench.mutants if m.killable][:30]
        rows = np.array([
            [bench.matrix.outcome(m.id, t.id) != "pass" for t in bench.tests]
            for m in killable
        ])
        summary = association_summary(rows)
        assert summary["yules_q"] is not None
        assert -0.35 < summary["yules_q"]["median"] < 0.35

    def test_planted_correlation_creates_perfect_association_pairs(self):
        # correlated chains reuse the previous mutant's killing tests, so
        # pairs with Yule's Q = 1 become common
        import itertools
        from mutpipe.statsval import (
            UndefinedAssociationError, contingency, yules_q,
        )
        mk = lambda corr, seed: generate_bench(
            BenchSpec(n_mutants=60, n_tests=120, n_files=1,
                      statements_per_file=30, correlation=corr), seed=seed)
        def perfect_pairs(bench):
            killable = [m for m in bench.mutants if m.killable][:30]
            rows = [
                [bench.matrix.outcome(m.id, t.id) != "pass"
                 for t in bench.tests]
                for m in killable
            ]
            count = 0
            for i, j in itertools.combinations(range(len(rows)), 2):
                try:
                    if yules_q(*contingency(rows[i], rows[j])) == 1.0:
                        count += 1
                except UndefinedAssociationError:
                    pass
            return count
        for seed in range(3):
            assert perfect_pairs(mk(0.9, seed)) > perfect_pairs(mk(0.0, seed))


class TestBundleIO:
    def test_roundtrip(self, tmp_path):
        bench = generate_bench(small_spec(), seed=11)
        write_bundle(bench, tmp_path / "b")
        back = read_bundle(tmp_path / "b")
        assert back.spec == bench.spec
        assert back.matrix.outcomes == bench.matrix.outcomes
        assert [m.id for m in back.mutants] == [m.id for m in bench.mutants]
        assert [(v.test_id, v.file, v.counts) for v in back.original_coverage] \
            == [(v.test_id, v.file, v.counts) for v in bench.original_coverage]
        assert set(back.matrix.coverage) == set(bench.matrix.coverage)

    def test_byte_reproducible(self, tmp_path):
        for sub in ("x", "y"):
            write_bundle(generate_bench(small_spec(), seed=12), tmp_path / sub)
        for name in ("meta.json", "tests.tsv", "mutants.tsv",
                     "killmatrix.tsv", "coverage.tsv", "mutcov.tsv"):
            assert (tmp_path / "x" / name).read_bytes() == \
                (tmp_path / "y" / name).read_bytes()

    def test_meta_records_ground_truth(self, tmp_path):
        import json
        bench = generate_bench(small_spec(true_ms=0.75), seed=13)
        write_bundle(bench, tmp_path / "b")
        meta = json.loads((tmp_path / "b" / "meta.json").read_text())
        assert meta["true_ms"] == pytest.approx(round(0.75 * 120) / 120)
        assert meta["seed"] == 13
