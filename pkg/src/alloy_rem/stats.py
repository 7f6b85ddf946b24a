"""Tail-index estimation, Kolmogorov-Smirnov distances and summaries."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import stats as _st

from .errors import DegenerateTail

_DISTINCT_RTOL = 1e-12


def hill(sample, k: int) -> float:
    """Hill estimate of the tail index from the ``k`` largest observations."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if not 2 <= k < n:
        raise ValueError(f"need 2 <= k < N, got k={k}, N={n}")
    top = x[n - k - 1:]
    if top[0] <= 0:
        raise DegenerateTail("top order statistics must be strictly positive")
    if top[-1] - top[0] <= _DISTINCT_RTOL * top[-1]:
        raise DegenerateTail("top order statistics are not distinct")
    logs = np.log(top[1:]) - math.log(top[0])
    return float(k / math.fsum(logs))


def default_k(n: int) -> int:
    return math.ceil(math.sqrt(n))


def hill_upper_tail(sample, k: int | None = None) -> dict:
    """Hill on the part of the sample above its median, with a k-sensitivity report.

    Centered statistics can be negative; the upper tail carries the index.
    ``k`` defaults to ``ceil(sqrt(N))`` with N the full sample size.
    """
    x = np.asarray(sample, dtype=float)
    n = x.size
    upper = x[x > np.median(x)]
    k = default_k(n) if k is None else k
    ks = sorted({max(2, math.ceil(n ** e)) for e in (0.4, 0.5, 0.6)})
    sens = {kk: hill(upper, kk) for kk in ks if kk < upper.size}
    return {"k": k, "estimate": hill(upper, k), "sensitivity": sens,
            "tail": "values above the sample median"}


def ks_one_sample(sample, cdf: Callable) -> float:
    """Sup distance between the empirical CDF and ``cdf``; valid for discontinuous ``cdf``."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    i = np.arange(1, n + 1)
    # ties: the ECDF jumps at the last of equal values
    last = np.r_[x[1:] != x[:-1], True]
    first = np.r_[True, x[1:] != x[:-1]]
    up = np.max((i / n - f)[last])
    down = np.max((f_left - (i - 1) / n)[first])
    return float(min(1.0, max(up, down, 0.0)))


def ks_two_sample(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    return float(_st.ks_2samp(a, b).statistic)


def ks_critical(n: int, level: float = 0.05) -> float:
    """Asymptotic one-sample KS critical value ``c(level) / sqrt(n)``."""
    c = {0.1: 1.224, 0.05: 1.358, 0.01: 1.628}[level]
    return c / math.sqrt(n)


def summarize(sample, probs=(0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)) -> dict:
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample")
    q = np.quantile(x, probs)
    return {
        "n": int(x.size),
        "mean": float(np.mean(x)),
        "variance": float(np.var(x, ddof=1)) if x.size > 1 else 0.0,
        "median": float(np.median(x)),
        "quantiles": {f"{p:g}": float(v) for p, v in zip(probs, q)},
        "max": float(np.max(x)),
    }
