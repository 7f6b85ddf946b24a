"""Monte Carlo engine for the partition function.

Levels are enumerated in fixed blocks of ``BLOCK`` terms. For every block the
kernel records the largest energy of each mixture branch and, per beta, the
sums of ``exp(beta (E_j - E_max))``; terms more than 700 e-folds below their
block maximum are dropped, a relative error below ``m e^-700``. Blocks are
merged with ``math.fsum``, which is exact-then-rounded and therefore
independent of order. Since a block's content depends only on
``(seed, stream_id, block index)``, any split of the blocks between workers
gives bit-identical results.

Energies are shared between the betas of one call (common random numbers):
replica ``r`` at size ``n`` always uses stream ``(seed, n << 32 | r)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, InvalidParams, RegimeMismatch
from .model import ModelParams, SystemConfig, level_count, log_mean_partition, log_var_partition
from .norm import Normalization, RegimeTag, centering, normalize
from .phase import regime as phase_regime
from .rng import RngStream
from .stats import summarize

BLOCK = _kernels.BLOCK
MAX_LEVELS = 10 ** 9


class Statistic(str, Enum):
    LLN_RATIO = "LLNRatio"
    CLT_NORMALIZED = "CLTNormalized"
    STABLE_NORMALIZED = "StableNormalized"


@dataclass(frozen=True)
class ReplicaResult:
    log_s_total: float
    log_s_standard: float
    log_s_shifted: float
    count_standard: int
    count_shifted: int
    max_log_term: float


@dataclass(frozen=True)
class Shard:
    stream_id: int
    start: int  # first term, inclusive
    stop: int   # last term, exclusive


def default_workers() -> int:
    env = os.environ.get("ALLOY_REM_WORKERS")
    if env:
        try:
            w = int(env)
        except ValueError:
            raise InvalidParams(f"ALLOY_REM_WORKERS must be an integer, got {env!r}") from None
        if w >= 1:
            return w
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def replica_stream(seed: int, n: int, replica: int) -> RngStream:
    return RngStream(seed, (n << 32) | replica)


def shard_plan(m: int, workers: int, stream_id: int = 0) -> list[Shard]:
    """Split ``[0, m)`` into at most ``workers`` contiguous, block-aligned ranges."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    nblocks = -(-m // BLOCK)
    k = max(1, min(workers, nblocks))
    edges = [nblocks * i // k for i in range(k + 1)]
    return [Shard(stream_id, edges[i] * BLOCK, min(m, edges[i + 1] * BLOCK)) for i in range(k)]


def _check_budget(m: int, max_levels: int) -> None:
    if m > max_levels:
        raise BudgetExceeded(f"m = {m} levels exceeds the cap of {max_levels}")


@dataclass
class _Blocks:
    emax0: np.ndarray
    emax1: np.ndarray
    count1: np.ndarray
    sums0: np.ndarray
    sums1: np.ndarray


def _alloc(m: int, nb: int) -> _Blocks:
    nblocks = -(-m // BLOCK)
    return _Blocks(np.empty(nblocks), np.empty(nblocks), np.empty(nblocks, dtype=np.int64),
                   np.empty((nb, nblocks)), np.empty((nb, nblocks)))


def _run_shard(key, m, shard: Shard, n, p: ModelParams, betas, out: _Blocks) -> None:
    _kernels.replica_blocks(
        key, m, shard.start // BLOCK, -(-shard.stop // BLOCK), math.sqrt(n), n * p.a,
        p.sigma * math.sqrt(n), betas, out.emax0, out.emax1, out.count1, out.sums0, out.sums1)


def _log_fsum(logs_base: np.ndarray, weights: np.ndarray, top: float) -> float:
    """``top + log(sum_b w_b exp(base_b - top))`` with an exact-then-rounded sum."""
    if top == -math.inf:
        return -math.inf
    with np.errstate(invalid="ignore"):
        terms = weights * np.exp(logs_base - top)
    terms = terms[np.isfinite(logs_base)]
    return top + math.log(math.fsum(terms.tolist()))


def _merge(blocks: _Blocks, j: int, beta: float, m: int) -> ReplicaResult:
    b0 = beta * blocks.emax0 if beta != 0 else np.where(np.isfinite(blocks.emax0), 0.0, -np.inf)
    b1 = beta * blocks.emax1 if beta != 0 else np.where(np.isfinite(blocks.emax1), 0.0, -np.inf)
    top0 = float(np.max(b0))
    top1 = float(np.max(b1))
    top = max(top0, top1)
    ls0 = _log_fsum(b0, blocks.sums0[j], top0)
    ls1 = _log_fsum(b1, blocks.sums1[j], top1)
    total = _log_fsum(np.concatenate([b0, b1]),
                      np.concatenate([blocks.sums0[j], blocks.sums1[j]]), top)
    k1 = int(blocks.count1.sum())
    return ReplicaResult(total, ls0, ls1, m - k1, k1, top)


def simulate_replica(c: SystemConfig, p: ModelParams, stream: RngStream, workers: int = 1,
                     max_levels: int = MAX_LEVELS) -> ReplicaResult:
    """One draw of ``S_n(beta)`` and its two component sums.

    Level ``j`` uses normal index ``j`` of the stream; ``stream.counter`` must be 0.
    """
    return _simulate_one(c.n, np.array([c.beta]), p, stream, workers, max_levels)[0]


def _simulate_one(n, betas, p, stream, workers, max_levels) -> list[ReplicaResult]:
    if stream.counter != 0:
        raise ValueError("the partition-function engine enumerates levels from counter 0")
    m = level_count(n)
    _check_budget(m, max_levels)
    betas = np.ascontiguousarray(betas, dtype=float)
    out = _alloc(m, betas.size)
    shards = shard_plan(m, workers, stream.stream_id)
    key = stream.key
    if len(shards) == 1:
        _run_shard(key, m, shards[0], n, p, betas, out)
    else:
        with ThreadPoolExecutor(len(shards)) as ex:
            list(ex.map(lambda s: _run_shard(key, m, s, n, p, betas, out), shards))
    return [_merge(out, j, float(b), m) for j, b in enumerate(betas)]


@dataclass
class Pool:
    """Replicas of ``S_n`` at several betas sharing the same energies.

    Arrays have shape ``(len(betas), max(replicas))``; entries beyond a beta's
    own replica count are NaN.
    """

    params: ModelParams
    n: int
    betas: np.ndarray
    replicas: np.ndarray
    seed: int
    log_s_total: np.ndarray
    log_s_standard: np.ndarray
    log_s_shifted: np.ndarray
    max_log_term: np.ndarray
    count_standard: np.ndarray

    def index(self, beta: float) -> int:
        hits = np.flatnonzero(np.isclose(self.betas, beta, rtol=1e-14, atol=0.0))
        if hits.size == 0:
            raise KeyError(f"beta {beta} not in pool")
        return int(hits[0])

    def log_s(self, beta: float) -> np.ndarray:
        j = self.index(beta)
        return self.log_s_total[j, :self.replicas[j]]

    def component_logs(self, beta: float) -> tuple[np.ndarray, np.ndarray]:
        j = self.index(beta)
        r = self.replicas[j]
        return self.log_s_standard[j, :r], self.log_s_shifted[j, :r]


def simulate_pool(p: ModelParams, n: int, betas, replicas, seed: int, workers: int | None = None,
                  max_levels: int = MAX_LEVELS) -> Pool:
    """Simulate ``replicas`` (an int, or one count per beta) replicas of ``S_n``.

    Replica ``r`` uses only the betas whose count exceeds ``r``, so a beta
    with fewer replicas costs proportionally less.
    """
    betas = np.asarray(betas, dtype=float).ravel()
    if betas.size == 0 or np.any(betas < 0) or not np.all(np.isfinite(betas)):
        raise InvalidParams("betas must be finite and nonnegative")
    reps = np.broadcast_to(np.asarray(replicas, dtype=np.int64), betas.shape).copy()
    if np.any(reps < 1):
        raise InvalidParams("replicas must be >= 1")
    m = level_count(n)
    _check_budget(m, max_levels)
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise InvalidParams("workers must be >= 1")
    rmax = int(reps.max())
    shape = (betas.size, rmax)
    res = {k: np.full(shape, np.nan) for k in ("tot", "std", "shf", "top")}
    counts = np.empty(rmax, dtype=np.int64)

    def one(r: int, shard_workers: int):
        active = np.flatnonzero(reps > r)
        rs = _simulate_one(n, betas[active], p, replica_stream(seed, n, r), shard_workers,
                           max_levels)
        for j, rr in zip(active, rs):
            res["tot"][j, r] = rr.log_s_total
            res["std"][j, r] = rr.log_s_standard
            res["shf"][j, r] = rr.log_s_shifted
            res["top"][j, r] = rr.max_log_term
        counts[r] = rs[0].count_standard

    if workers == 1:
        for r in range(rmax):
            one(r, 1)
    elif rmax >= workers:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(lambda r: one(r, 1), range(rmax)))
    else:
        for r in range(rmax):
            one(r, workers)
    return Pool(p, n, betas, reps, seed, res["tot"], res["std"], res["shf"], res["top"], counts)


# experiments ---------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    beta: float
    n_values: tuple[int, ...]
    replicas: int
    seed: int
    statistic: Statistic
    workers: int | None = None
    max_levels: int = MAX_LEVELS

    def __post_init__(self):
        object.__setattr__(self, "statistic", Statistic(self.statistic))
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        if self.replicas < 1:
            raise InvalidParams("replicas must be >= 1")
        if not self.n_values:
            raise InvalidParams("n_values must not be empty")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")
        for n in self.n_values:
            _check_budget(level_count(n), self.max_levels)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    values: dict[int, np.ndarray]
    summaries: dict[int, dict]
    normalizations: dict[int, dict | None]
    regime: dict | None = field(default=None)


def lln_ratio(log_s, c: SystemConfig, p: ModelParams):
    return np.exp(np.asarray(log_s) - log_mean_partition(c, p))


def clt_statistic(log_s, c: SystemConfig, p: ModelParams):
    """``(S - E S) / sqrt(Var S)`` evaluated from ``log S`` by signed log differencing."""
    lm = log_mean_partition(c, p)
    ls = 0.5 * log_var_partition(c, p)
    return normalize(log_s, Normalization(RegimeTag.CLT, ls, lm, ls))


def _normalization_for(cfg: ExperimentConfig, n: int, reg) -> Normalization | None:
    stat = cfg.statistic
    if cfg.beta == 0:
        if stat is not Statistic.LLN_RATIO:
            raise RegimeMismatch("only LLNRatio is defined at beta = 0")
        return None
    if stat is Statistic.LLN_RATIO:
        if not (reg.lln.holds or reg.lln.critical):
            raise RegimeMismatch(f"LLN does not hold at beta={cfg.beta}")
        return centering(cfg.beta, n, cfg.params, reg, RegimeTag.LLN)
    if stat is Statistic.CLT_NORMALIZED:
        if not (reg.clt.holds or reg.clt.critical):
            raise RegimeMismatch(f"CLT does not hold at beta={cfg.beta}")
        return centering(cfg.beta, n, cfg.params, reg, RegimeTag.CLT)
    if not reg.stable.holds:
        raise RegimeMismatch(f"no stable limit at beta={cfg.beta}")
    tag = (RegimeTag.STABLE_STANDARD if reg.stable.dominant.value == "standard"
           else RegimeTag.STABLE_SHIFTED)
    return centering(cfg.beta, n, cfg.params, reg, tag)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    reg = phase_regime(cfg.beta, cfg.params) if cfg.beta > 0 else None
    norms = {n: _normalization_for(cfg, n, reg) for n in cfg.n_values}
    values, summaries = {}, {}
    for n in cfg.n_values:
        pool = simulate_pool(cfg.params, n, [cfg.beta], cfg.replicas, cfg.seed, cfg.workers,
                             cfg.max_levels)
        log_s = pool.log_s(cfg.beta)
        nm = norms[n]
        if cfg.statistic is Statistic.LLN_RATIO:
            v = lln_ratio(log_s, SystemConfig(cfg.beta, n), cfg.params)
        else:
            v = normalize(log_s, nm)
        values[n] = np.atleast_1d(v)
        summaries[n] = summarize(values[n])
    return ExperimentResult(cfg, values, summaries,
                            {n: (nm.to_dict() if nm else None) for n, nm in norms.items()},
                            reg.to_dict() if reg else None)
