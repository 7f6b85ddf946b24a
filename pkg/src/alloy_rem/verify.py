"""Acceptance suite: each criterion at its stated tolerance, run at desk scale.

Replica pools are simulated once per (parameters, n) with several betas on
common energies, then shared by every criterion that needs them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import DiscriminantNegative
from .model import ModelParams, SystemConfig, level_count
from .norm import centering, log_gamma, stable_spec_for, tail_sum, truncated_moment
from .phase import SQRT2, beta_diamond, beta_star, classify_zone, free_energy, p1, p2, regime
from .rng import RngStream
from .simulate import Pool, clt_statistic, lln_ratio, simulate_pool
from .stable import sample_stable_many
from .stats import hill_upper_tail, ks_one_sample, ks_two_sample

DEFAULT_SEED = 1

CLASSICAL = ModelParams(0.0, 1.0)
ALLOY = ModelParams(1.0, 2.0)
FREE_ENERGY_PARAMS = (ModelParams(0.0, 1.0), ModelParams(1.0, 2.0), ModelParams(-3.0, 2.0),
                      ModelParams(0.2, 0.5))
FREE_ENERGY_BETAS = (0.3, 0.8, 1.5, 2.5)

# name -> (params, n, betas, replicas per beta)
POOLS: dict[str, tuple[ModelParams, int, tuple[float, ...], tuple[int, ...]]] = {
    "classical16": (CLASSICAL, 16, (0.5, SQRT2 / 2, 0.9, SQRT2, 2.0, 2 * SQRT2),
                    (2000, 2000, 500, 500, 4000, 4000)),
    "classical12": (CLASSICAL, 12, (0.9,), (500,)),
    "alloy16": (ALLOY, 16, (0.3, 0.5, 1.0), (2000, 500, 4000)),
    "alloy12": (ALLOY, 12, (0.5,), (500,)),
}
for _i, _p in enumerate(FREE_ENERGY_PARAMS):
    for _n in (10, 18):
        POOLS[f"fe{_i}_{_n}"] = (_p, _n, FREE_ENERGY_BETAS, (100,) * 4)


class PoolCache:
    def __init__(self, seed: int = DEFAULT_SEED, workers: int | None = None):
        self.seed = seed
        self.workers = workers
        self._pools: dict[str, Pool] = {}

    def get(self, name: str) -> Pool:
        if name not in self._pools:
            p, n, betas, reps = POOLS[name]
            self._pools[name] = simulate_pool(p, n, betas, reps, self.seed, self.workers)
        return self._pools[name]


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    checks: list[dict] = field(default_factory=list)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key} {self.title}"

    def to_dict(self) -> dict:
        return asdict(self)


def _check(name: str, value, lo=None, hi=None, ok=None, **extra) -> dict:
    if ok is None:
        ok = (lo is None or value >= lo) and (hi is None or value <= hi)
    return {"check": name, "value": value, "low": lo, "high": hi, "passed": bool(ok), **extra}


def _result(key, title, checks) -> CriterionResult:
    return CriterionResult(key, title, all(c["passed"] for c in checks), checks)


# 1 -------------------------------------------------------------------------

def criterion_free_energy(cache: PoolCache) -> CriterionResult:
    checks = []
    for i, p in enumerate(FREE_ENERGY_PARAMS):
        lo, hi = cache.get(f"fe{i}_10"), cache.get(f"fe{i}_18")
        for beta in FREE_ENERGY_BETAS:
            f = free_energy(beta, p)
            g10 = abs(float(np.median(lo.log_s(beta))) / 10 - f)
            g18 = abs(float(np.median(hi.log_s(beta))) / 18 - f)
            checks.append(_check(f"a={p.a},sigma={p.sigma},beta={beta}", g18, hi=0.08,
                                 ok=g18 <= 0.08 and g18 < g10, gap_n10=g10, free_energy=f))
    return _result("C1", "free-energy convergence: |median log S_18/18 - P| <= 0.08, gap shrinks",
                   checks)


# 2 -------------------------------------------------------------------------

def criterion_lln(cache: PoolCache) -> CriterionResult:
    checks = []
    for p, beta, big, small in ((ALLOY, 0.5, "alloy16", "alloy12"),
                                (CLASSICAL, 0.9, "classical16", "classical12")):
        r16 = lln_ratio(cache.get(big).log_s(beta), SystemConfig(beta, 16), p)
        r12 = lln_ratio(cache.get(small).log_s(beta), SystemConfig(beta, 12), p)
        checks.append(_check(f"mean ratio a={p.a},sigma={p.sigma},beta={beta},n=16",
                             float(r16.mean()), 0.97, 1.03))
        v12, v16 = float(r12.var(ddof=1)), float(r16.var(ddof=1))
        checks.append(_check(f"variance decreases n=12->16 a={p.a},sigma={p.sigma}", v16,
                             ok=v16 < v12, var_n12=v12))
    r = lln_ratio(cache.get("classical16").log_s(SQRT2), SystemConfig(SQRT2, 16), CLASSICAL)
    checks.append(_check("critical mean ratio a=0,sigma=1,beta=sqrt2,n=16", float(r.mean()),
                         0.43, 0.57))
    return _result("C2", "LLN: mean S/ES in [0.97,1.03]; critical mean in [0.43,0.57]", checks)


# 3 -------------------------------------------------------------------------

def criterion_clt(cache: PoolCache) -> CriterionResult:
    checks = []
    for p, beta, pool in ((CLASSICAL, 0.5, "classical16"), (ALLOY, 0.3, "alloy16")):
        z = clt_statistic(cache.get(pool).log_s(beta), SystemConfig(beta, 16), p)
        d = ks_one_sample(z, ndtr)
        checks.append(_check(f"KS vs N(0,1) a={p.a},sigma={p.sigma},beta={beta}", d, hi=0.05,
                             replicas=int(z.size)))
    b = SQRT2 / 2
    z = clt_statistic(cache.get("classical16").log_s(b), SystemConfig(b, 16), CLASSICAL)
    checks.append(_check("critical variance a=0,sigma=1,beta=sqrt2/2", float(z.var(ddof=1)),
                         0.35, 0.65))
    return _result("C3", "CLT: KS < 0.05; critical variance in [0.35,0.65]", checks)


# 4, 5 ----------------------------------------------------------------------

STABLE_REFERENCE_DRAWS = 100_000


def stable_values(pool: Pool, beta: float) -> tuple[np.ndarray, object]:
    p = pool.params
    reg = regime(beta, p)
    nm = centering(beta, pool.n, p, reg)
    return nm.apply(pool.log_s(beta)), stable_spec_for(beta, p, reg)


def criterion_stable(cache: PoolCache) -> CriterionResult:
    checks = []
    target = SQRT2 / 2
    for i, (p, beta, pool) in enumerate(((CLASSICAL, 2.0, "classical16"),
                                         (ALLOY, 1.0, "alloy16"))):
        x, spec = stable_values(cache.get(pool), beta)
        h = hill_upper_tail(x)
        checks.append(_check(f"Hill a={p.a},sigma={p.sigma},beta={beta}", h["estimate"],
                             target - 0.15, target + 0.15, k=h["k"],
                             sensitivity={str(k): v for k, v in h["sensitivity"].items()}))
        ref = sample_stable_many(spec, RngStream(cache.seed, 0xC0FFEE + i), STABLE_REFERENCE_DRAWS)
        checks.append(_check(f"KS two-sample vs stable a={p.a},sigma={p.sigma},beta={beta}",
                             ks_two_sample(x, ref), hi=0.08, alpha=spec.alpha, drift=spec.drift))
    return _result("C4", "stable tail index within sqrt2/2 +- 0.15; KS vs stable law < 0.08",
                   checks)


def criterion_drift(cache: PoolCache) -> CriterionResult:
    beta = 2 * SQRT2
    pool = cache.get("classical16")
    x = np.exp(pool.log_s(beta) - log_gamma(beta, pool.n))
    spec = stable_spec_for(beta, CLASSICAL, regime(beta, CLASSICAL))
    ref = sample_stable_many(spec, RngStream(cache.seed, 0xD21F7), STABLE_REFERENCE_DRAWS)
    ref_med = float(np.median(ref))
    med = float(np.median(x))
    rel = med / ref_med - 1.0
    return _result("C5", "classical drift: median S/gamma within 25% of stable median", [
        _check("relative deviation of median", rel, -0.25, 0.25, median=med,
               reference_median=ref_med, drift=spec.drift)])


# 6 -------------------------------------------------------------------------

MC_DRAWS = 10_000_000


def criterion_norm_functionals(seed: int = DEFAULT_SEED) -> CriterionResult:
    checks = []
    # independent oracle: numpy's PCG64 rather than the package stream
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(MC_DRAWS)
    for n in (1, 4):
        m = level_count(n)
        for beta in (0.5, 1.0):
            ls = log_gamma(beta, n)
            y = np.exp(beta * math.sqrt(n) * xi - ls)
            for tau in (0.5, 1.0, 2.0):
                mc = m * float(np.mean(np.where(y <= tau, y, 0.0)))
                val = math.exp(truncated_moment(1, tau, beta, n, ls))
                checks.append(_check(f"J n={n},beta={beta},tau={tau}", val / mc - 1.0,
                                     -0.01, 0.01, closed_form=val, monte_carlo=mc))
    lim = 1.0 / math.sqrt(2.0 * math.pi)
    ts = tail_sum(1.0, 1.0, 400, log_gamma(1.0, 400))
    checks.append(_check("tail sum n=400,beta=1,x=1 vs 1/sqrt(2pi)", ts / lim - 1.0,
                         -0.05, 0.05, value_abs=ts))
    return _result("C6", "truncated moment vs Monte Carlo within 1%; tail-sum limit within 5%",
                   checks)


# 7 -------------------------------------------------------------------------

def reference_zone_grid(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Zone numbers 1..6 (0 for boundary) straight from the three separating curves."""
    r2 = math.sqrt(2.0)
    c1 = (1 - s ** 2) / r2
    c2 = r2 * (1 - s)
    c3 = (1 - s ** 2) / (r2 * s)
    z = np.zeros(a.shape, dtype=int)
    z[a > c3] = 1
    z[a < c1] = 4
    mid = (a > c1) & (a < c3)
    z[mid & (s > 1) & (a > c2)] = 2
    z[mid & (s > 1) & (a < c2)] = 3
    z[mid & (s < 1) & (a < c2)] = 5
    z[mid & (s < 1) & (a > c2)] = 6
    tol = 1e-12 * np.maximum(1.0, np.abs(a))
    near = (np.abs(a - c1) <= tol) | (np.abs(a - c2) <= tol) | (np.abs(a - c3) <= tol)
    z[near | (np.abs(s - 1) <= 1e-12)] = 0
    return z


def continuity_points(p: ModelParams) -> list[float]:
    pts = [SQRT2, SQRT2 / p.sigma]
    if p.sigma != 1:
        bc = 2 * p.a / (1 - p.sigma ** 2)
        if bc > 0:
            pts.append(bc)
    for fn in (beta_star, beta_diamond):
        try:
            pts.append(fn(p))
        except DiscriminantNegative:
            pass
    return [b for b in pts if b > 1e-6]


def criterion_phase(grid: int = 400) -> CriterionResult:
    a = np.linspace(-4.0, 4.0, grid)
    s = np.linspace(3.0 / grid, 3.0, grid)
    aa, ss = np.meshgrid(a, s, indexing="ij")
    ref = reference_zone_grid(aa, ss)
    labels = {"Boundary": 0, "Z1": 1, "Z2": 2, "Z3": 3, "Z4": 4, "Z5": 5, "Z6": 6}
    got = np.vectorize(lambda x, y: labels[classify_zone(ModelParams(x, y)).value])(aa, ss)
    mism = int(np.count_nonzero(got != ref))
    checks = [_check("zone mismatches on 400x400 grid", mism, ok=mism == 0,
                     zones_present=sorted({int(v) for v in np.unique(got)}))]

    eps = 1e-8
    worst = 0.0
    params = [ModelParams(x, y) for x in (-3.0, -1.0, 0.0, 0.2, 0.5, 1.0, 2.0)
              for y in (0.5, 0.8, 1.0, 1.5, 2.0)]
    for p in params:
        for b in continuity_points(p):
            worst = max(worst, abs(free_energy(b + eps, p) - free_energy(b - eps, p)),
                        abs(p1(b + eps) - p1(b - eps)), abs(p2(b + eps, p) - p2(b - eps, p)))
    checks.append(_check("free-energy jump at branch points", worst, hi=1e-6))

    worst_root = 0.0
    for p in params + [ModelParams(-1.0, 2.0), ModelParams(-0.5, 1.2)]:
        try:
            bs = beta_star(p)
        except DiscriminantNegative:
            continue
        b = bs / 2
        worst_root = max(worst_root, abs(2 * b * b - 2 * (p.a + SQRT2 * p.sigma) * b + 1))
    checks.append(_check("quadratic at beta_*/2", worst_root, hi=1e-10))
    return _result("C7", "phase geometry: zones exact, continuity 1e-6, root identity 1e-10",
                   checks)


SUITES: dict[str, tuple[str, ...]] = {
    "free-energy": ("C1",),
    "lln": ("C2",),
    "clt": ("C3",),
    "stable": ("C4", "C5"),
    "norm-functionals": ("C6",),
    "phase": ("C7",),
}
SUITES["all"] = tuple(k for v in SUITES.values() for k in v)

_RUNNERS: dict[str, Callable[[PoolCache], CriterionResult]] = {
    "C1": criterion_free_energy,
    "C2": criterion_lln,
    "C3": criterion_clt,
    "C4": criterion_stable,
    "C5": criterion_drift,
    "C6": lambda cache: criterion_norm_functionals(cache.seed),
    "C7": lambda cache: criterion_phase(),
}


def run_criterion(key: str, cache: PoolCache) -> CriterionResult:
    return _RUNNERS[key](cache)


def run_suite(name: str, seed: int = DEFAULT_SEED, workers: int | None = None,
              cache: PoolCache | None = None) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(name)
    cache = cache or PoolCache(seed, workers)
    return [run_criterion(k, cache) for k in SUITES[name]]
