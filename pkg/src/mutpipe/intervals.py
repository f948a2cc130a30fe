"""Binomial confidence intervals: exact Clopper-Pearson and Wilson score."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from statistics import NormalDist

from . import kernels


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError(f"malformed interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, p: float) -> bool:
        return self.lower <= p <= self.upper


def _check_args(k: int, n: int, level: float) -> None:
    if n < 1:
        raise ValueError(f"trials must be >= 1, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"successes {k} outside [0, {n}]")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0,1), got {level}")


def clopper_pearson(k: int, n: int, level: float = 0.95) -> ConfidenceInterval:
    """Exact two-sided Clopper-Pearson interval for a binomial proportion.

    Computed by bisection on the exact binomial tail probabilities (no
    special-function dependency); bounds are accurate to well below 1e-9.
    """
    _check_args(k, n, level)
    lower, upper = kernels.cp_bounds(k, n, 1.0 - level)
    return ConfidenceInterval(lower, upper, level)


def wilson(k: int, n: int, level: float = 0.95) -> ConfidenceInterval:
    """Wilson score interval, clamped to [0, 1]."""
    _check_args(k, n, level)
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    phat = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2.0 * n)) / denom
    margin = (z / denom) * sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n))
    return ConfidenceInterval(
        max(0.0, center - margin), min(1.0, center + margin), level
    )
