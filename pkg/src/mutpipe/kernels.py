"""Numeric hot kernels: binomial tails, Clopper-Pearson bisection, coverage
distances, and the correlated-binomial grid fit.

All kernels are written as plain scalar/loop code that numba can compile with
``@njit``. Set ``MUTPIPE_NO_NUMBA=1`` to skip JIT compilation and run the same
code paths in pure Python/numpy (slower, dependency-light, bit-compatible).
``benchmarks/bench_kernels.py`` compares the two modes.
"""

from __future__ import annotations

import math
import os

import numpy as np

_ENV_FLAG = os.environ.get("MUTPIPE_NO_NUMBA", "").strip().lower()
USE_NUMBA = _ENV_FLAG not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


# Metric codes shared with coverage.py / prioritize.py.
JACCARD = 0
OCHIAI = 1
EUCLIDEAN = 2
COSINE = 3

# Relative truncation for binomial tail sums. Terms below this fraction of the
# running sum cannot move the bisection at the 1e-9 tolerance used for bounds.
_TAIL_EPS = 1e-17


@njit(cache=True)
def log_binom_pmf(k: int, n: int, p: float) -> float:
    if p <= 0.0:
        return 0.0 if k == 0 else -np.inf
    if p >= 1.0:
        return 0.0 if k == n else -np.inf
    return (
        math.lgamma(n + 1.0)
        - math.lgamma(k + 1.0)
        - math.lgamma(n - k + 1.0)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


@njit(cache=True)
def binom_cdf(k: int, n: int, p: float) -> float:
    """P(X <= k) for X ~ Binomial(n, p).

    Sums pmf terms downward from k with a term recurrence, truncating once
    terms are negligible; O(sqrt(n*p*q)) terms touched in the common case.
    """
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    t = math.exp(log_binom_pmf(k, n, p))
    s = t
    i = k
    while i > 0:
        # pmf(i-1) = pmf(i) * i * (1-p) / ((n-i+1) * p)
        t *= i * (1.0 - p) / ((n - i + 1.0) * p)
        s += t
        i -= 1
        if t < s * _TAIL_EPS:
            break
    if s > 1.0:
        s = 1.0
    return s


@njit(cache=True)
def binom_sf_geq(k: int, n: int, p: float) -> float:
    """P(X >= k) for X ~ Binomial(n, p), summing upward from k."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    t = math.exp(log_binom_pmf(k, n, p))
    s = t
    i = k
    while i < n:
        # pmf(i+1) = pmf(i) * (n-i) * p / ((i+1) * (1-p))
        t *= (n - i) * p / ((i + 1.0) * (1.0 - p))
        s += t
        i += 1
        if t < s * _TAIL_EPS:
            break
    if s > 1.0:
        s = 1.0
    return s


@njit(cache=True)
def cp_bounds(k: int, n: int, alpha: float) -> tuple[float, float]:
    """Exact (Clopper-Pearson) two-sided interval by bisection on the
    binomial tails; bounds accurate to ~1e-12."""
    half = alpha / 2.0
    if k <= 0:
        lower = 0.0
    else:
        lo = 0.0
        hi = 1.0
        # P(X >= k) increases in p; find p with tail == half
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if binom_sf_geq(k, n, mid) < half:
                lo = mid
            else:
                hi = mid
        lower = 0.5 * (lo + hi)
    if k >= n:
        upper = 1.0
    else:
        lo = 0.0
        hi = 1.0
        # P(X <= k) decreases in p; find p with tail == half
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if binom_cdf(k, n, mid) > half:
                lo = mid
            else:
                hi = mid
        upper = 0.5 * (lo + hi)
    return lower, upper


@njit(cache=True)
def pair_distance(a: np.ndarray, b: np.ndarray, metric: int) -> float:
    """Distance in [0, 1] between two aligned count vectors.

    Jaccard/Ochiai binarize counts first. Euclidean is normalized by the sum
    of the two vector norms. Degenerate all-zero vectors: 0 against another
    all-zero vector, 1 against a nonzero one (for the ratio-based metrics).
    """
    n = a.shape[0]
    if metric == JACCARD or metric == OCHIAI:
        inter = 0.0
        na = 0.0
        nb = 0.0
        for i in range(n):
            ca = a[i] > 0.0
            cb = b[i] > 0.0
            if ca:
                na += 1.0
            if cb:
                nb += 1.0
            if ca and cb:
                inter += 1.0
        if na == 0.0 and nb == 0.0:
            return 0.0
        if na == 0.0 or nb == 0.0:
            return 1.0
        if metric == JACCARD:
            union = na + nb - inter
            return 1.0 - inter / union
        return 1.0 - inter / math.sqrt(na * nb)
    if metric == EUCLIDEAN:
        diff2 = 0.0
        na2 = 0.0
        nb2 = 0.0
        for i in range(n):
            d = a[i] - b[i]
            diff2 += d * d
            na2 += a[i] * a[i]
            nb2 += b[i] * b[i]
        denom = math.sqrt(na2) + math.sqrt(nb2)
        if denom == 0.0:
            return 0.0
        r = math.sqrt(diff2) / denom
        if r > 1.0:
            r = 1.0
        return r
    # cosine
    dot = 0.0
    na2 = 0.0
    nb2 = 0.0
    for i in range(n):
        dot += a[i] * b[i]
        na2 += a[i] * a[i]
        nb2 += b[i] * b[i]
    if na2 == 0.0 and nb2 == 0.0:
        return 0.0
    if na2 == 0.0 or nb2 == 0.0:
        return 1.0
    r = 1.0 - dot / (math.sqrt(na2) * math.sqrt(nb2))
    # snap rounding dust to an exact zero so identical vectors compare
    # equal under a strict zero distance threshold
    if r < 1e-12:
        r = 0.0
    if r > 1.0:
        r = 1.0
    return r


@njit(cache=True)
def _distance_matrix_loop(counts: np.ndarray, metric: int) -> np.ndarray:
    t = counts.shape[0]
    out = np.zeros((t, t))
    for i in range(t):
        for j in range(i + 1, t):
            d = pair_distance(counts[i], counts[j], metric)
            out[i, j] = d
            out[j, i] = d
    return out


def _distance_matrix_numpy(counts: np.ndarray, metric: int) -> np.ndarray:
    """Vectorized fallback used when numba is disabled."""
    c = np.asarray(counts, dtype=np.float64)
    t = c.shape[0]
    if metric in (JACCARD, OCHIAI):
        b = (c > 0).astype(np.float64)
        inter = b @ b.T
        sizes = b.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            if metric == JACCARD:
                union = sizes[:, None] + sizes[None, :] - inter
                d = 1.0 - np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)
            else:
                denom = np.sqrt(np.outer(sizes, sizes))
                d = 1.0 - np.where(denom > 0, inter / np.where(denom > 0, denom, 1.0), 0.0)
        both_zero = (sizes[:, None] == 0) & (sizes[None, :] == 0)
        one_zero = (sizes[:, None] == 0) ^ (sizes[None, :] == 0)
        d[both_zero] = 0.0
        d[one_zero] = 1.0
    elif metric == EUCLIDEAN:
        norms = np.linalg.norm(c, axis=1)
        diff = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
        denom = norms[:, None] + norms[None, :]
        d = np.where(denom > 0, diff / np.where(denom > 0, denom, 1.0), 0.0)
        np.clip(d, 0.0, 1.0, out=d)
    else:
        norms = np.linalg.norm(c, axis=1)
        dot = c @ c.T
        denom = np.outer(norms, norms)
        d = 1.0 - np.where(denom > 0, dot / np.where(denom > 0, denom, 1.0), 0.0)
        both_zero = (norms[:, None] == 0) & (norms[None, :] == 0)
        one_zero = (norms[:, None] == 0) ^ (norms[None, :] == 0)
        d[both_zero] = 0.0
        d[one_zero] = 1.0
        d[d < 1e-12] = 0.0
        np.clip(d, 0.0, 1.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def distance_matrix(counts: np.ndarray, metric: int) -> np.ndarray:
    """Pairwise distance matrix over rows of a (tests x statements) count
    matrix; dispatches to the JIT loop or the numpy fallback."""
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    if USE_NUMBA:
        return _distance_matrix_loop(counts, metric)
    return _distance_matrix_numpy(counts, metric)


@njit(cache=True)
def g2_term(y: float, n: float, p: float) -> float:
    dev = y - n * p
    return (dev * dev - (1.0 - 2.0 * p) * dev - n * p * (1.0 - p)) / (
        2.0 * p * (1.0 - p)
    )


@njit(cache=True)
def correlated_binom_pmf_vec(n: int, p: float, r2: float) -> np.ndarray:
    """PMF of the second-order correlated (Bahadur) binomial over Y=0..N.

    Returns the raw values; entries can go negative outside the validity
    region, which the caller must reject.
    """
    out = np.empty(n + 1)
    for y in range(n + 1):
        base = math.exp(log_binom_pmf(y, n, p))
        out[y] = base * (1.0 + r2 * g2_term(float(y), float(n), p))
    return out


@njit(cache=True)
def grid_fit_ess(
    h: np.ndarray, p_grid: np.ndarray, r2_grid: np.ndarray
) -> tuple[float, float, float]:
    """Grid search for (p, r2) minimizing the error sum of squares between
    the observed histogram h over Y=0..N and the correlated binomial PMF.

    Parameter combinations producing any negative pmf term are skipped.
    Returns (best_p, best_r2, best_ess).
    """
    n = h.shape[0] - 1
    best_ess = np.inf
    best_p = -1.0
    best_r2 = 0.0
    base = np.empty(n + 1)
    g2v = np.empty(n + 1)
    for pi in range(p_grid.shape[0]):
        p = p_grid[pi]
        if p <= 0.0 or p >= 1.0:
            continue
        for y in range(n + 1):
            base[y] = math.exp(log_binom_pmf(y, n, p))
            g2v[y] = g2_term(float(y), float(n), p)
        for ri in range(r2_grid.shape[0]):
            r2 = r2_grid[ri]
            ess = 0.0
            valid = True
            for y in range(n + 1):
                model = base[y] * (1.0 + r2 * g2v[y])
                if model < 0.0:
                    valid = False
                    break
                d = h[y] - model
                ess += d * d
            if valid and ess < best_ess:
                best_ess = ess
                best_p = p
                best_r2 = r2
    return best_p, best_r2, best_ess
