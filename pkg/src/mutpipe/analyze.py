"""Classification of live mutants as (non)equivalent and mutant pairs as
(non)duplicate from coverage distances, plus the two mutation-score formulas.

Defaults follow the calibrated pipeline settings: cosine distance, T_E = 0,
and duplicates NOT discarded for the score (no workable T_D exists), with the
duplicate-discarding score available separately.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .coverage import CoverageVector, distance

log = logging.getLogger(__name__)

DEFAULT_METRIC = "cosine"
DEFAULT_T_E = 0.0


class EmptyDenominatorError(Exception):
    pass


def classify_equivalent(
    live_mutant_ids: list[str],
    original_coverage: dict[str, CoverageVector],  # test id -> vector
    mutant_coverage: dict[str, dict[str, CoverageVector]],  # mutant -> test -> vector
    metric: str = DEFAULT_METRIC,
    t_e: float = DEFAULT_T_E,
) -> tuple[set[str], set[str]]:
    """Split live mutants into (nonequivalent, likely-equivalent).

    A mutant is nonequivalent when, for at least one test executed on it, the
    distance between the original run's coverage and the mutant run's
    coverage exceeds ``t_e``. Mutants with no coverage evidence are left out
    of both sets with a warning.
    """
    nonequivalent: set[str] = set()
    likely_equivalent: set[str] = set()
    for mid in live_mutant_ids:
        per_test = mutant_coverage.get(mid)
        if not per_test:
            log.warning("mutant %s has no coverage evidence; unclassified", mid)
            continue
        witnesses = [
            t for t, vec in per_test.items()
            if t in original_coverage
            and distance(original_coverage[t], vec, metric) > t_e
        ]
        if witnesses:
            nonequivalent.add(mid)
        else:
            likely_equivalent.add(mid)
    return nonequivalent, likely_equivalent


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def classify_duplicates(
    mutants: list,  # objects with .id, .file attributes
    verdicts: dict[str, object],  # mutant id -> ExecutionVerdict
    mutant_coverage: dict[str, dict[str, CoverageVector]],
    metric: str = DEFAULT_METRIC,
    t_d: float = 0.0,
) -> list[set[str]]:
    """Duplicate groups (transitive closure) among same-file mutants.

    A pair is nonduplicate when some test executed on both shows a distance
    above ``t_d``, or when both are killed but by different tests. Pairs with
    no distance witness and no killing-test disagreement are merged.
    """
    by_file: dict[str, list] = {}
    for m in mutants:
        by_file.setdefault(m.file, []).append(m)
    uf = _UnionFind()
    for file_mutants in by_file.values():
        ms = sorted(file_mutants, key=lambda m: m.id)
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                a, b = ms[i], ms[j]
                va, vb = verdicts.get(a.id), verdicts.get(b.id)
                if va is not None and vb is not None:
                    if va.killed and vb.killed and va.killing_test != vb.killing_test:
                        continue  # different killing tests: never duplicate
                    if va.killed != vb.killed:
                        continue
                cov_a = mutant_coverage.get(a.id, {})
                cov_b = mutant_coverage.get(b.id, {})
                shared = set(cov_a) & set(cov_b)
                if any(distance(cov_a[t], cov_b[t], metric) > t_d
                       for t in sorted(shared)):
                    continue
                uf.union(a.id, b.id)
    groups: dict[str, set[str]] = {}
    for mid in uf.parent:
        groups.setdefault(uf.find(mid), set()).add(mid)
    return sorted((g for g in groups.values() if len(g) > 1),
                  key=lambda g: min(g))


def mutation_score(knd: int, lnend: int) -> float:
    """Score over nonduplicate mutants: killed / (killed + live-nonequivalent)."""
    if knd < 0 or lnend < 0:
        raise ValueError("counts must be non-negative")
    if knd + lnend == 0:
        raise EmptyDenominatorError("no mutants to score")
    return knd / (knd + lnend)


def mutation_score_nodup(killed: int, live_nonequivalent: int) -> float:
    """Score variant treating every mutant as nonduplicate (the calibrated
    default: no reliable duplicate threshold exists)."""
    return mutation_score(killed, live_nonequivalent)


@dataclass
class AnalysisReport:
    """Per-mutant terminal classification plus the final score(s)."""

    classifications: dict[str, str] = field(default_factory=dict)
    duplicate_groups: list[list[str]] = field(default_factory=list)
    score: float = 0.0
    score_with_duplicates_discarded: float | None = None
    interval: tuple[float, float, float] | None = None  # lower, upper, level
    counts: dict[str, int] = field(default_factory=dict)
    savings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "score_with_duplicates_discarded": self.score_with_duplicates_discarded,
            "interval": list(self.interval) if self.interval else None,
            "counts": {k: self.counts[k] for k in sorted(self.counts)},
            "savings": {k: self.savings[k] for k in sorted(self.savings)},
            "duplicate_groups": [sorted(g) for g in self.duplicate_groups],
            "classifications": {
                k: self.classifications[k] for k in sorted(self.classifications)
            },
        }

    def summary(self) -> str:
        lines = [f"mutation score: {self.score:.4f}"]
        if self.interval:
            lo, hi, level = self.interval
            lines.append(f"{level:.0%} interval: [{lo:.4f}, {hi:.4f}]")
        if self.score_with_duplicates_discarded is not None:
            lines.append(
                "score (duplicates discarded): "
                f"{self.score_with_duplicates_discarded:.4f}"
            )
        for k in sorted(self.counts):
            lines.append(f"{k}: {self.counts[k]}")
        for k in sorted(self.savings):
            lines.append(f"{k}: {self.savings[k]:.2%}")
        return "\n".join(lines)
