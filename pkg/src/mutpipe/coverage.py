"""Per-test statement execution counts and the four coverage distances.

Coverage is always scoped to a single source file (the file containing the
mutated statement); vectors from different files never get compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

METRICS = ("jaccard", "ochiai", "euclidean", "cosine")

_METRIC_CODES = {
    "jaccard": kernels.JACCARD,
    "ochiai": kernels.OCHIAI,
    "euclidean": kernels.EUCLIDEAN,
    "cosine": kernels.COSINE,
}


class MismatchedFileError(Exception):
    pass


def metric_code(metric: str) -> int:
    try:
        return _METRIC_CODES[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass
class CoverageVector:
    file: str
    test_id: str
    counts: dict[int, int] = field(default_factory=dict)
    context: str = "original"  # "original" or a mutant id

    def __post_init__(self):
        for sid, c in self.counts.items():
            if c < 0:
                raise ValueError(f"negative count for statement {sid}")

    def covered(self) -> set[int]:
        return {sid for sid, c in self.counts.items() if c > 0}

    def count_at(self, statement_id: int) -> int:
        return self.counts.get(statement_id, 0)


def align(vectors: list[CoverageVector],
          universe: list[int] | None = None) -> tuple[list[int], np.ndarray]:
    """Align vectors on a shared statement-id universe; missing ids are 0.

    Returns (sorted universe, len(vectors) x len(universe) float matrix).
    """
    if universe is None:
        ids: set[int] = set()
        for v in vectors:
            ids.update(v.counts)
        universe = sorted(ids)
    else:
        universe = sorted(universe)
    mat = np.zeros((len(vectors), len(universe)))
    index = {sid: i for i, sid in enumerate(universe)}
    for r, v in enumerate(vectors):
        for sid, c in v.counts.items():
            col = index.get(sid)
            if col is not None:
                mat[r, col] = c
    return universe, mat


def distance(a: CoverageVector, b: CoverageVector, metric: str) -> float:
    """Normalized distance in [0, 1] between two coverage vectors."""
    if a.file != b.file:
        raise MismatchedFileError(f"{a.file} vs {b.file}")
    code = metric_code(metric)
    _, mat = align([a, b])
    if mat.shape[1] == 0:
        return 0.0
    return float(kernels.pair_distance(
        np.ascontiguousarray(mat[0]), np.ascontiguousarray(mat[1]), code))


def covered_tests(statement_id: int,
                  original_coverage: list[CoverageVector]) -> set[str]:
    """Tests whose original-program run executes the statement at least once."""
    return {
        v.test_id for v in original_coverage if v.count_at(statement_id) > 0
    }


# ---------------------------------------------------------------------------
# Coverage matrix file: one row per (test, file):
#   test_id <TAB> file <TAB> context <TAB> sid:count sid:count ...
# ---------------------------------------------------------------------------

def write_matrix(vectors: list[CoverageVector], path) -> None:
    with open(path, "w") as fh:
        for v in vectors:
            pairs = " ".join(
                f"{sid}:{v.counts[sid]}" for sid in sorted(v.counts)
            )
            fh.write(f"{v.test_id}\t{v.file}\t{v.context}\t{pairs}\n")


def read_matrix(path) -> list[CoverageVector]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            test_id, file, context, pairs = line.split("\t")
            counts = {}
            for pair in pairs.split():
                sid, c = pair.split(":")
                counts[int(sid)] = int(c)
            out.append(CoverageVector(file=file, test_id=test_id,
                                      counts=counts, context=context))
    return out


def from_lcov(text: str, test_id: str, line_to_statement: dict[int, int],
              file: str, context: str = "original") -> CoverageVector:
    """Adapter for lcov-style line records (``SF:``/``DA:line,count``).

    ``line_to_statement`` maps 1-based source lines to statement ids (as
    produced by the parser's line spans); lines outside the map are dropped.
    """
    counts: dict[int, int] = {}
    for raw in text.splitlines():
        raw = raw.strip()
        if not raw.startswith("DA:"):
            continue
        line_no, count = raw[3:].split(",")[:2]
        sid = line_to_statement.get(int(line_no))
        if sid is None:
            continue
        counts[sid] = counts.get(sid, 0) + int(count)
    return CoverageVector(file=file, test_id=test_id, counts=counts,
                          context=context)


def line_statement_map(unit) -> dict[int, int]:
    """Line -> statement-id map for a parsed SourceUnit (first statement on a
    line wins)."""
    out: dict[int, int] = {}
    for stmt in unit.statements:
        for line in range(stmt.line_span[0], stmt.line_span[1] + 1):
            out.setdefault(line, stmt.id)
    return out
