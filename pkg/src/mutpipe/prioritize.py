"""Greedy coverage-diversity ordering of the tests covering a mutant.

The first test is the one exercising the mutated statement the most; each
subsequent pick maximizes the minimum distance to the already-selected tests
(farthest-point ordering). The list ends as soon as no remaining test shows
any coverage difference from the selected ones.
"""

from __future__ import annotations

import random

import numpy as np

from . import kernels
from .coverage import CoverageVector, align, metric_code

# numerical dust floor for the continuous metrics; binary metrics compare
# against exact zero
_CONTINUOUS_EPS = 1e-12


class EmptyTestSetError(Exception):
    pass


def _eps(metric: str) -> float:
    return _CONTINUOUS_EPS if metric in ("euclidean", "cosine") else 0.0


def prioritize_and_reduce(
    statement_id: int,
    tests: set[str],
    original_coverage: dict[str, CoverageVector],
    metric: str = "cosine",
    seed: int = 0,
) -> list[str]:
    """Ordered, reduced test list for a mutant at ``statement_id``.

    ``tests`` must be the covering tests; ``original_coverage`` maps test id
    to its original-program coverage vector for the mutated file. Ties on
    min-distance prefer the higher count at the mutated statement, then a
    seeded random draw.
    """
    if not tests:
        raise EmptyTestSetError("no covering tests")
    rng = random.Random(seed)
    ids = sorted(tests)
    vectors = [original_coverage[t] for t in ids]
    _, mat = align(vectors)
    dist = kernels.distance_matrix(mat, metric_code(metric))
    counts = np.array([v.count_at(statement_id) for v in vectors], dtype=float)
    eps = _eps(metric)

    def pick(candidates: list[int], key) -> int:
        best = max(key(c) for c in candidates)
        tied = [c for c in candidates if key(c) == best]
        if len(tied) == 1:
            return tied[0]
        # tie on the primary key: prefer max mutated-statement count
        top = max(counts[c] for c in tied)
        tied = [c for c in tied if counts[c] == top]
        return tied[0] if len(tied) == 1 else rng.choice(tied)

    remaining = list(range(len(ids)))
    first = pick(remaining, key=lambda c: counts[c])
    selected = [first]
    remaining.remove(first)

    while remaining:
        min_dist = {c: min(dist[c, s] for s in selected) for c in remaining}
        best = max(min_dist.values())
        if best <= eps:
            break
        tied = [c for c in remaining if min_dist[c] == best]
        nxt = tied[0] if len(tied) == 1 else pick(tied, key=lambda c: min_dist[c])
        selected.append(nxt)
        remaining.remove(nxt)

    return [ids[i] for i in selected]


def random_baseline(tests: set[str], seed: int = 0) -> list[str]:
    """Baseline: a single covering test chosen uniformly at random."""
    if not tests:
        raise EmptyTestSetError("no covering tests")
    rng = random.Random(seed)
    return [rng.choice(sorted(tests))]
