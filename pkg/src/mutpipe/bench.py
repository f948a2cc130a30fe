"""Synthetic bench bundles: a kill matrix plus coverage matrices with a known
ground-truth mutation score, for desk-scale experiments and acceptance runs.

Bundle layout (one directory):
    meta.json       generation parameters and ground truth
    tests.tsv       test_id <TAB> baseline_duration
    mutants.tsv     id <TAB> file <TAB> statement_id <TAB> function <TAB> killable
    killmatrix.tsv  mutant_id <TAB> test_id <TAB> outcome (fail|timeout)
    coverage.tsv    original-program coverage matrix (see coverage.write_matrix)
    mutcov.tsv      per-(mutant, test) coverage of the mutated file
All rows are emitted in sorted order so bundles are byte-reproducible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, asdict
from pathlib import Path

from .coverage import CoverageVector, read_matrix, write_matrix
from .execute import KillMatrix, TestCase

# Named regimes; "mlfs-like" mirrors a high-coverage mathematical-library
# test-suite profile.
PRESETS = {
    "mlfs-like": {"true_ms": 0.8182, "cover_prob": 0.6},
    "default": {"true_ms": 0.70, "cover_prob": 0.3},
}


class InfeasibleSpecError(Exception):
    pass


@dataclass
class BenchSpec:
    n_mutants: int = 1000
    n_tests: int = 50
    n_files: int = 4
    statements_per_file: int = 50
    true_ms: float = 0.70
    cover_prob: float = 0.3  # chance a test covers a given statement
    max_count: int = 10  # execution counts drawn from 1..max_count
    kill_prob: float = 0.5  # chance each covering test kills a killable mutant
    timeout_prob: float = 0.02  # chance a killing test kills via timeout
    live_equiv_fraction: float = 0.0  # live mutants with coverage identical to original
    perturbation_prob: float = 0.8  # per-test chance a non-equivalent mutant's coverage differs
    correlation: float = 0.0  # chance consecutive killable mutants share killing tests
    killer_bias: str = "random"  # or "max-count": killer covers the statement the most
    coverage_profiles: int = 0  # >0: tests share this many covered-set prototypes per file

    def __post_init__(self):
        if not 0.0 < self.true_ms < 1.0:
            raise InfeasibleSpecError("true_ms must be in (0, 1)")
        if min(self.n_mutants, self.n_tests, self.n_files,
               self.statements_per_file) < 1:
            raise InfeasibleSpecError("counts must be positive")
        if self.killer_bias not in ("random", "max-count"):
            raise InfeasibleSpecError(f"unknown killer_bias {self.killer_bias!r}")
        if self.coverage_profiles < 0:
            raise InfeasibleSpecError("coverage_profiles must be >= 0")


@dataclass
class BenchMutant:
    id: str
    file: str
    statement_id: int
    function: str
    killable: bool


@dataclass
class Bench:
    spec: BenchSpec
    seed: int
    tests: list[TestCase]
    mutants: list[BenchMutant]
    matrix: KillMatrix
    original_coverage: list[CoverageVector]  # one vector per (test, file)

    def coverage_for_file(self, file: str) -> dict[str, CoverageVector]:
        return {v.test_id: v for v in self.original_coverage if v.file == file}

    def mutant_coverage(self, mutant_id: str) -> dict[str, CoverageVector]:
        return {
            test_id: vec
            for (mid, test_id), vec in self.matrix.coverage.items()
            if mid == mutant_id
        }


def generate_bench(spec: BenchSpec, seed: int = 0) -> Bench:
    """Generate a bench whose full-suite mutation score is exactly
    round(true_ms * n_mutants) / n_mutants."""
    rng = random.Random(seed)
    files = [f"unit{i}.c" for i in range(spec.n_files)]
    tests = [
        TestCase(id=f"t{i:04d}",
                 baseline_duration=round(rng.uniform(0.5, 2.0), 3))
        for i in range(spec.n_tests)
    ]

    # covered-set prototypes: with coverage_profiles > 0 each test adopts one
    # per file, so tests fall into a few coverage-redundant groups
    prototypes: dict[str, list[list[int]]] = {}
    if spec.coverage_profiles > 0:
        for f in files:
            protos = []
            for _ in range(spec.coverage_profiles):
                sids = [sid for sid in range(spec.statements_per_file)
                        if rng.random() < spec.cover_prob]
                if not sids:
                    sids = [rng.randrange(spec.statements_per_file)]
                protos.append(sids)
            prototypes[f] = protos

    # original coverage per (test, file)
    original: list[CoverageVector] = []
    cov_index: dict[tuple[str, str], CoverageVector] = {}
    for t in tests:
        for f in files:
            if spec.coverage_profiles > 0:
                sids = rng.choice(prototypes[f])
                counts = {sid: rng.randint(1, spec.max_count) for sid in sids}
            else:
                counts = {
                    sid: rng.randint(1, spec.max_count)
                    for sid in range(spec.statements_per_file)
                    if rng.random() < spec.cover_prob
                }
            vec = CoverageVector(file=f, test_id=t.id, counts=counts)
            original.append(vec)
            cov_index[(t.id, f)] = vec

    # statements covered by at least one test, per file
    coverable: dict[str, list[int]] = {}
    for f in files:
        ids = sorted({
            sid for t in tests for sid in cov_index[(t.id, f)].covered()
        })
        if not ids:
            raise InfeasibleSpecError(f"no covered statements in {f}")
        coverable[f] = ids

    n_killable = round(spec.true_ms * spec.n_mutants)
    if n_killable == 0 or n_killable == spec.n_mutants:
        raise InfeasibleSpecError("true_ms too extreme for this mutant count")

    mutants: list[BenchMutant] = []
    matrix = KillMatrix(durations={t.id: t.baseline_duration for t in tests})
    prev_killers: list[str] | None = None
    for i in range(spec.n_mutants):
        f = files[i % len(files)]
        sid = rng.choice(coverable[f])
        func = f"fn{sid // 10}"
        killable = i < n_killable
        m = BenchMutant(
            id=f"m{i:05d}", file=f, statement_id=sid, function=func,
            killable=killable,
        )
        mutants.append(m)
        covering = sorted(
            t.id for t in tests if cov_index[(t.id, f)].count_at(sid) > 0
        )
        killers: list[str] = []
        if killable:
            if prev_killers and rng.random() < spec.correlation:
                killers = [t for t in prev_killers if t in covering]
            if not killers:
                if spec.killer_bias == "max-count":
                    best = max(covering,
                               key=lambda t: cov_index[(t, f)].count_at(sid))
                    killers = [best]
                    killers += [t for t in covering
                                if t != best and rng.random() < spec.kill_prob / 4]
                else:
                    killers = [t for t in covering
                               if rng.random() < spec.kill_prob]
                    if not killers:
                        killers = [rng.choice(covering)]
            prev_killers = killers
            for t in killers:
                outcome = ("timeout" if rng.random() < spec.timeout_prob
                           else "fail")
                matrix.outcomes[(m.id, t)] = outcome

        # mutant coverage for every covering test
        identical = (not killable) and rng.random() < spec.live_equiv_fraction
        for t in covering:
            base = cov_index[(t, f)].counts
            counts = dict(base)
            if not identical and rng.random() < spec.perturbation_prob:
                sid_pert = rng.choice(sorted(counts))
                counts[sid_pert] = counts[sid_pert] + rng.randint(1, 3)
            matrix.coverage[(m.id, t)] = CoverageVector(
                file=f, test_id=t, counts=counts, context=m.id
            )

    return Bench(spec=spec, seed=seed, tests=tests, mutants=mutants,
                 matrix=matrix, original_coverage=original)


def true_score(bench: Bench) -> float:
    return sum(m.killable for m in bench.mutants) / len(bench.mutants)


# ---------------------------------------------------------------------------
# Bundle persistence
# ---------------------------------------------------------------------------

def write_bundle(bench: Bench, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = {"seed": bench.seed, "true_ms": true_score(bench),
            "spec": asdict(bench.spec)}
    (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    with open(d / "tests.tsv", "w") as fh:
        for t in bench.tests:
            fh.write(f"{t.id}\t{t.baseline_duration}\n")
    with open(d / "mutants.tsv", "w") as fh:
        for m in bench.mutants:
            fh.write(f"{m.id}\t{m.file}\t{m.statement_id}\t{m.function}"
                     f"\t{int(m.killable)}\n")
    with open(d / "killmatrix.tsv", "w") as fh:
        for (mid, tid) in sorted(bench.matrix.outcomes):
            fh.write(f"{mid}\t{tid}\t{bench.matrix.outcomes[(mid, tid)]}\n")
    write_matrix(bench.original_coverage, d / "coverage.tsv")
    mut_vecs = [bench.matrix.coverage[k] for k in sorted(bench.matrix.coverage)]
    write_matrix(mut_vecs, d / "mutcov.tsv")


def read_bundle(directory) -> Bench:
    d = Path(directory)
    meta = json.loads((d / "meta.json").read_text())
    spec = BenchSpec(**meta["spec"])
    tests = []
    with open(d / "tests.tsv") as fh:
        for line in fh:
            tid, dur = line.split("\t")
            tests.append(TestCase(id=tid, baseline_duration=float(dur)))
    mutants = []
    with open(d / "mutants.tsv") as fh:
        for line in fh:
            mid, f, sid, func, killable = line.rstrip("\n").split("\t")
            mutants.append(BenchMutant(mid, f, int(sid), func,
                                       bool(int(killable))))
    matrix = KillMatrix(durations={t.id: t.baseline_duration for t in tests})
    with open(d / "killmatrix.tsv") as fh:
        for line in fh:
            mid, tid, outcome = line.rstrip("\n").split("\t")
            matrix.outcomes[(mid, tid)] = outcome
    for vec in read_matrix(d / "mutcov.tsv"):
        matrix.coverage[(vec.context, vec.test_id)] = vec
    original = read_matrix(d / "coverage.tsv")
    return Bench(spec=spec, seed=meta["seed"], tests=tests, mutants=mutants,
                 matrix=matrix, original_coverage=original)
