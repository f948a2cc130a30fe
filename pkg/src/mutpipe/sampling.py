"""Mutant sampling strategies: proportional (uniform / per-function),
fixed-size, and sequential fixed-width confidence-interval (FSCI) sampling
with the reduced-test-suite interval correction.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .intervals import ConfidenceInterval, clopper_pearson, wilson

STRATEGIES = ("proportional-uniform", "proportional-method", "fixed-size", "fsci")

# No interval check before this many executed mutants; extreme tallies at
# tiny n can otherwise stop the loop spuriously.
MIN_FSCI_SAMPLES = 10


@dataclass
class SamplingConfig:
    strategy: str = "fsci"
    ratio: float = 0.1  # r, for the proportional strategies
    fixed_size: int = 1000  # N_M
    t_ci: float = 0.10
    level: float = 0.95
    seed: int = 0
    calibration_size: int = 100  # M_R

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError("ratio must be in (0, 1]")
        if not 0.0 < self.t_ci < 1.0:
            raise ValueError("t_ci must be in (0, 1)")
        if self.fixed_size < 1 or self.calibration_size < 1:
            raise ValueError("sizes must be positive")


@dataclass
class KillErrorEstimate:
    observed_errors: int
    sample_size: int
    interval: ConfidenceInterval
    # (mutant, full-suite killed, reduced-suite killed) per calibration mutant
    verdicts: list = field(default_factory=list)

    def __post_init__(self):
        if self.observed_errors > self.sample_size:
            raise ValueError("observed errors exceed sample size")


@dataclass
class FsciResult:
    sampled: list  # list of (mutant, killed: bool)
    interval: ConfidenceInterval  # effective (possibly widened) interval
    converged: bool
    fallback_to_full_suite: bool = False

    @property
    def killed(self) -> int:
        return sum(1 for _, k in self.sampled if k)

    @property
    def estimate(self) -> float:
        return self.killed / len(self.sampled) if self.sampled else 0.0


def sample_proportional(mutants: list, ratio: float, by_method: bool,
                        seed: int) -> list:
    """Sample ceil(ratio * n) mutants, either uniformly or per-function.

    Per-function mode samples ceil(ratio * |stratum|) from every function
    stratum, so no nonempty stratum goes unsampled. Selection order is
    deterministic for a given seed.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError("ratio must be in (0, 1]")
    rng = random.Random(seed)
    if not by_method:
        k = math.ceil(ratio * len(mutants))
        return rng.sample(mutants, k) if mutants else []
    strata: dict = {}
    for m in mutants:
        strata.setdefault((m.file, m.function), []).append(m)
    out = []
    for key in sorted(strata, key=lambda k: (k[0], k[1] or "")):
        group = strata[key]
        out.extend(rng.sample(group, math.ceil(ratio * len(group))))
    return out


def sample_fixed(mutants: list, n: int, seed: int) -> list:
    if n < 1:
        raise ValueError("sample size must be positive")
    rng = random.Random(seed)
    return rng.sample(mutants, min(n, len(mutants)))


def estimate_kerr(calibration: list, full_suite_executor,
                  reduced_suite_executor, level: float = 0.95
                  ) -> KillErrorEstimate:
    """Estimate the probability that the reduced suite misses a kill.

    Runs both executors on the calibration mutants; the error count is the
    number killed by the full suite but not by the reduced one. The interval
    is the Wilson score interval (well-behaved at small sample sizes).
    """
    if not calibration:
        raise ValueError("calibration set is empty")
    verdicts = []
    errors = 0
    for m in calibration:
        full = bool(full_suite_executor(m))
        reduced = bool(reduced_suite_executor(m))
        if full and not reduced:
            errors += 1
        verdicts.append((m, full, reduced))
    interval = wilson(errors, len(calibration), level)
    return KillErrorEstimate(errors, len(calibration), interval, verdicts)


def reusable_calibration(kerr: KillErrorEstimate) -> list:
    """Calibration verdicts safe to reuse inside the FSCI tally: only mutants
    where the reduced suite agreed with the full suite, so all FSCI trials
    remain reduced-suite verdicts."""
    return [(m, reduced) for m, full, reduced in kerr.verdicts
            if full == reduced]


def fsci_loop(population: list, executor, config: SamplingConfig,
              kerr: KillErrorEstimate | None = None,
              preexecuted: list | None = None) -> FsciResult:
    """Sample mutants until the Clopper-Pearson interval on the kill tally is
    narrower than ``config.t_ci``.

    With a reduced test suite, ``kerr`` widens the interval to
    [L, U + U_E] with U_E the upper Wilson bound on the kill-miss
    probability. If U_E already exceeds the width threshold the reduction
    cannot give accurate results: the loop signals fallback-to-full-suite and
    applies no widening (the executor is then expected to be the full suite).

    ``preexecuted`` seeds the tally with (mutant, killed) verdicts already
    collected (e.g. reusable calibration runs); those mutants are not drawn
    again.
    """
    widen = 0.0
    fallback = False
    if kerr is not None:
        if kerr.interval.upper > config.t_ci:
            fallback = True
        else:
            widen = kerr.interval.upper

    rng = random.Random(config.seed)
    order = list(population)
    rng.shuffle(order)

    sampled: list = []
    seen_ids = set()
    if preexecuted:
        for m, killed in preexecuted:
            sampled.append((m, bool(killed)))
            seen_ids.add(id(m) if not hasattr(m, "id") else m.id)

    def current_interval() -> ConfidenceInterval:
        k = sum(1 for _, killed in sampled if killed)
        ci = clopper_pearson(k, len(sampled), config.level)
        upper = min(1.0, ci.upper + widen)
        return ConfidenceInterval(ci.lower, upper, config.level)

    def stopped() -> bool:
        if len(sampled) < MIN_FSCI_SAMPLES:
            return False
        return current_interval().width < config.t_ci

    if sampled and stopped():
        return FsciResult(sampled, current_interval(), True, fallback)

    for m in order:
        key = id(m) if not hasattr(m, "id") else m.id
        if key in seen_ids:
            continue
        sampled.append((m, bool(executor(m))))
        if stopped():
            return FsciResult(sampled, current_interval(), True, fallback)

    if not sampled:
        raise ValueError("empty population")
    return FsciResult(sampled, current_interval(), False, fallback)
