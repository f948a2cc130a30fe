"""Mutation-analysis pipeline for C-like codebases.

Stages: mutant generation, build-hash trivial dedup, mutant sampling
(including sequential fixed-width confidence-interval sampling),
coverage-distance test prioritization, execution with early stop, and
equivalence/duplicate classification with mutation-score computation.
"""

from .analyze import (
    AnalysisReport,
    classify_duplicates,
    classify_equivalent,
    mutation_score,
    mutation_score_nodup,
)
from .bench import Bench, BenchSpec, generate_bench, read_bundle, write_bundle
from .build import BuildProfile, HashRecord, compile_mutant, detect_trivial
from .coverage import CoverageVector, covered_tests, distance
from .execute import (
    ExecutionVerdict,
    KillMatrix,
    SimulatedExecutor,
    SubprocessExecutor,
    TestCase,
    run_mutant,
    savings_report,
)
from .intervals import ConfidenceInterval, clopper_pearson, wilson
from .mutator import (
    Mutant,
    SourceUnit,
    generate_mutants,
    parse_unit,
    render_mutant,
)
from .pipeline import run_pipeline
from .prioritize import prioritize_and_reduce, random_baseline
from .sampling import (
    FsciResult,
    KillErrorEstimate,
    SamplingConfig,
    estimate_kerr,
    fsci_loop,
    sample_proportional,
)
from .statsval import (
    correlated_binomial_pmf,
    ess,
    fit_correlated_binomial,
    odds_ratio,
    yules_q,
)

__version__ = "0.1.0"
