"""Association and distribution-fit machinery for validating the binomial
assumption behind score sampling: second-order correlated binomial PMF,
Yule's Q, the odds ratio, and error-sum-of-squares model comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


class InvalidParametersError(Exception):
    """Parameters leave the correlated PMF's validity region (negative
    probability terms)."""


class UndefinedAssociationError(Exception):
    pass


def g2(y: float, n: float, p: float) -> float:
    """Second-order Bahadur correction term."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    return float(kernels.g2_term(float(y), float(n), float(p)))


def correlated_binomial_pmf(y: int, n: int, p: float, r2: float) -> float:
    """PMF of the correlated (Bahadur second-order) binomial at Y = y.

    Raises InvalidParametersError if (p, r2) produce a negative term anywhere
    on 0..n; the expansion is not a distribution there.
    """
    if not 0 <= y <= n:
        raise ValueError(f"y={y} outside 0..{n}")
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    vec = correlated_binomial_pmf_vector(n, p, r2)
    return float(vec[y])


def correlated_binomial_pmf_vector(n: int, p: float, r2: float) -> np.ndarray:
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    vec = kernels.correlated_binom_pmf_vec(n, p, r2)
    if np.min(vec) < 0.0:
        raise InvalidParametersError(
            f"(p={p}, r2={r2}) yields negative pmf terms"
        )
    return vec


def yules_q(a: int, b: int, c: int, d: int) -> float:
    """Yule's Q = (ad - bc) / (ad + bc) over a 2x2 contingency table."""
    _check_counts(a, b, c, d)
    ad, bc = a * d, b * c
    if ad + bc == 0:
        raise UndefinedAssociationError("ad + bc = 0: association unmeasurable")
    return (ad - bc) / (ad + bc)


def odds_ratio(a: int, b: int, c: int, d: int) -> float:
    """Odds ratio ad / bc; 1 means independence."""
    _check_counts(a, b, c, d)
    if b * c == 0:
        raise UndefinedAssociationError("bc = 0: odds ratio undefined")
    return (a * d) / (b * c)


def _check_counts(*counts: int) -> None:
    if any(x < 0 for x in counts):
        raise ValueError("contingency counts must be non-negative")


def contingency(x_killed, y_killed) -> tuple[int, int, int, int]:
    """(a, b, c, d) over paired boolean outcome sequences: a = both killed,
    b = first only, c = second only, d = neither."""
    a = b = c = d = 0
    for xi, yi in zip(x_killed, y_killed, strict=True):
        if xi and yi:
            a += 1
        elif xi:
            b += 1
        elif yi:
            c += 1
        else:
            d += 1
    return a, b, c, d


def ess(observed: np.ndarray, model: np.ndarray) -> float:
    """Error sum of squares between an observed histogram over Y=0..N and a
    model pmf of the same length."""
    observed = np.asarray(observed, dtype=float)
    model = np.asarray(model, dtype=float)
    if observed.shape != model.shape:
        raise ValueError(f"length mismatch: {observed.shape} vs {model.shape}")
    return float(np.sum((observed - model) ** 2))


@dataclass
class FitResult:
    p: float
    r2: float
    ess_correlated: float
    ess_binomial: float


def fit_correlated_binomial(
    observed: np.ndarray,
    p_step: float = 0.002,
    r2_step: float = 0.0001,
    r2_span: float = 0.002,
) -> FitResult:
    """Fit (p, r2) of the correlated binomial to an observed histogram by
    dense grid search minimizing the ESS.

    The p grid covers a neighborhood of the histogram mean; the r2 grid spans
    [-r2_span, r2_span]. Combinations outside the validity region are
    skipped. Deterministic, no special-function dependency.
    """
    h = np.asarray(observed, dtype=float)
    if h.ndim != 1 or h.shape[0] < 2:
        raise ValueError("observed histogram must cover Y = 0..N with N >= 1")
    if not math.isclose(float(h.sum()), 1.0, abs_tol=1e-6):
        raise ValueError("observed histogram must sum to 1")
    n = h.shape[0] - 1
    mean_p = float(np.dot(np.arange(n + 1), h)) / n
    p_lo = max(p_step, mean_p - 0.05)
    p_hi = min(1.0 - p_step, mean_p + 0.05)
    p_grid = np.arange(p_lo, p_hi + p_step / 2, p_step)
    r2_grid = np.arange(-r2_span, r2_span + r2_step / 2, r2_step)
    best_p, best_r2, best_ess = kernels.grid_fit_ess(h, p_grid, r2_grid)
    if best_p < 0:
        raise InvalidParametersError("no valid (p, r2) on the search grid")
    binom = kernels.correlated_binom_pmf_vec(n, mean_p if 0 < mean_p < 1 else best_p, 0.0)
    return FitResult(float(best_p), float(best_r2), float(best_ess),
                     ess(h, binom))


def association_summary(outcomes: np.ndarray) -> dict:
    """Quartile summary of Yule's Q and the odds ratio over all mutant pairs.

    ``outcomes`` is a (mutants x runs) boolean matrix of kill outcomes.
    Pairs with undefined Q or OR are skipped; their count is reported.
    """
    outcomes = np.asarray(outcomes, dtype=bool)
    m = outcomes.shape[0]
    qs, ors = [], []
    undefined = 0
    for i in range(m):
        for j in range(i + 1, m):
            a, b, c, d = contingency(outcomes[i], outcomes[j])
            try:
                qs.append(yules_q(a, b, c, d))
            except UndefinedAssociationError:
                undefined += 1
                continue
            try:
                ors.append(odds_ratio(a, b, c, d))
            except UndefinedAssociationError:
                pass
    def quartiles(xs):
        if not xs:
            return None
        arr = np.asarray(xs)
        q1, q2, q3 = np.percentile(arr, [25, 50, 75])
        return {"q1": float(q1), "median": float(q2), "q3": float(q3)}
    return {
        "pairs": m * (m - 1) // 2,
        "undefined": undefined,
        "yules_q": quartiles(qs),
        "odds_ratio": quartiles(ors),
    }
