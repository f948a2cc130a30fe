"""Test execution against mutants: early stop on the first kill, the 3x
baseline timeout rule, and two executors — a real subprocess runner and a
simulated kill-matrix runner for desk-scale experiments.
"""

from __future__ import annotations

import logging
import subprocess
import time
from dataclasses import dataclass, field

from .coverage import CoverageVector

log = logging.getLogger(__name__)

TIMEOUT_FACTOR = 3.0

OUTCOMES = ("pass", "fail", "timeout")


class ExecutorCrash(Exception):
    """Harness failure unrelated to the test outcome."""


@dataclass
class TestCase:
    id: str
    run_command: str = ""  # template; {mutant_exe} and {test_id} expand
    baseline_duration: float = 1.0  # seconds, from a passing original run

    def __post_init__(self):
        if self.baseline_duration <= 0:
            raise ValueError("baseline duration must be positive")


@dataclass
class ExecutionVerdict:
    mutant_id: str
    killed: bool
    killing_test: str | None
    tests_run: int
    wall_time: float
    timeout_kills: int = 0
    mutant_coverage: list[CoverageVector] = field(default_factory=list)
    inconclusive: bool = False

    def __post_init__(self):
        if not self.inconclusive and self.killed != (self.killing_test is not None):
            raise ValueError("killed iff killing-test present")


@dataclass
class KillMatrix:
    """Simulation backbone: per-(mutant, test) outcome, duration, and mutant
    coverage vectors."""

    outcomes: dict[tuple[str, str], str] = field(default_factory=dict)
    durations: dict[str, float] = field(default_factory=dict)  # per test
    coverage: dict[tuple[str, str], CoverageVector] = field(default_factory=dict)

    def outcome(self, mutant_id: str, test_id: str) -> str:
        return self.outcomes.get((mutant_id, test_id), "pass")

    def killed_by_any(self, mutant_id: str, test_ids) -> bool:
        return any(self.outcome(mutant_id, t) != "pass" for t in test_ids)


class SimulatedExecutor:
    """Executor over a KillMatrix; deterministic and offline."""

    def __init__(self, matrix: KillMatrix):
        self.matrix = matrix

    def run(self, mutant_id: str, test: TestCase
            ) -> tuple[str, float, CoverageVector | None]:
        outcome = self.matrix.outcome(mutant_id, test.id)
        duration = self.matrix.durations.get(test.id, test.baseline_duration)
        if outcome == "timeout":
            duration = TIMEOUT_FACTOR * test.baseline_duration
        cov = self.matrix.coverage.get((mutant_id, test.id))
        return outcome, duration, cov


class SubprocessExecutor:
    """Executor running each test as a shell command against a mutant
    executable; nonzero exit status or timeout counts as a kill."""

    def __init__(self, mutant_exe: str, env: dict | None = None):
        self.mutant_exe = mutant_exe
        self.env = env

    def run(self, mutant_id: str, test: TestCase
            ) -> tuple[str, float, CoverageVector | None]:
        cmd = test.run_command.format(mutant_exe=self.mutant_exe,
                                      test_id=test.id)
        limit = TIMEOUT_FACTOR * test.baseline_duration
        start = time.monotonic()
        try:
            proc = subprocess.run(
                cmd, shell=True, timeout=limit, env=self.env,
                stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
            )
        except subprocess.TimeoutExpired:
            return "timeout", limit, None
        except OSError as exc:
            raise ExecutorCrash(str(exc)) from exc
        elapsed = time.monotonic() - start
        return ("pass" if proc.returncode == 0 else "fail"), elapsed, None


def run_mutant(mutant_id: str, ordered_tests: list[TestCase],
               executor) -> ExecutionVerdict:
    """Execute tests in order, stopping at the first fail/timeout.

    Timeouts count as kills. Per-test wall time is charged at most
    TIMEOUT_FACTOR times the baseline duration. An executor crash yields an
    inconclusive verdict (excluded from scoring by the analyzer).
    """
    wall = 0.0
    coverage: list[CoverageVector] = []
    timeout_kills = 0
    for i, test in enumerate(ordered_tests):
        try:
            outcome, duration, cov = executor.run(mutant_id, test)
        except ExecutorCrash as exc:
            log.warning("executor crash on %s/%s: %s", mutant_id, test.id, exc)
            return ExecutionVerdict(mutant_id, False, None, i, wall,
                                    timeout_kills, coverage, inconclusive=True)
        wall += min(duration, TIMEOUT_FACTOR * test.baseline_duration)
        if cov is not None:
            coverage.append(cov)
        if outcome != "pass":
            if outcome == "timeout":
                timeout_kills += 1
            return ExecutionVerdict(mutant_id, True, test.id, i + 1, wall,
                                    timeout_kills, coverage)
    return ExecutionVerdict(mutant_id, False, None, len(ordered_tests), wall,
                            timeout_kills, coverage)


def savings_report(verdicts: list[ExecutionVerdict],
                   baseline_verdicts: list[ExecutionVerdict]
                   ) -> tuple[float, float]:
    """(time saving, test saving) of a run versus the original-suite
    baseline; both are fractions of the baseline and may be negative."""
    t_new = sum(v.wall_time for v in verdicts)
    t_base = sum(v.wall_time for v in baseline_verdicts)
    n_new = sum(v.tests_run for v in verdicts)
    n_base = sum(v.tests_run for v in baseline_verdicts)
    time_saving = (t_base - t_new) / t_base if t_base > 0 else 0.0
    test_saving = (n_base - n_new) / n_base if n_base > 0 else 0.0
    return time_saving, test_saving
