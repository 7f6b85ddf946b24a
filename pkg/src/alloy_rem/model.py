"""Energy-level law of the alloy-type REM and exact moments of its partition function.

Levels are i.i.d. draws from the two-component Gaussian mixture

    F(x) = 1/2 Phi(x) + 1/2 Phi((x - sqrt(n) a) / sigma),

and the partition function is ``S_n(beta) = sum_{j <= floor(e^n)} exp(beta sqrt(n) Z_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import ndtr

from .errors import InvalidParams
from .rng import RngStream

MAX_N = 40
LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ModelParams:
    a: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.sigma)):
            raise InvalidParams(f"non-finite parameters a={self.a}, sigma={self.sigma}")
        if self.sigma <= 0:
            raise InvalidParams(f"sigma must be positive, got {self.sigma}")

    @property
    def is_classical(self) -> bool:
        return self.a == 0.0 and self.sigma == 1.0


@lru_cache(maxsize=None)
def level_count(n: int) -> int:
    """``floor(e^n)`` exactly, for ``1 <= n <= 40``."""
    if isinstance(n, bool) or int(n) != n:
        raise InvalidParams(f"n must be an integer, got {n!r}")
    n = int(n)
    if not 1 <= n <= MAX_N:
        raise InvalidParams(f"n must lie in [1, {MAX_N}], got {n}")
    with mpmath.workdps(60):
        v = mpmath.exp(n)
        if abs(v - mpmath.nint(v)) <= mpmath.mpf("1e-6"):
            raise InvalidParams(f"e^{n} too close to an integer to floor reliably")
        return int(mpmath.floor(v))


@dataclass(frozen=True)
class SystemConfig:
    """One system: inverse temperature ``beta`` and size ``n``, with ``m = floor(e^n)`` levels.

    ``beta = 0`` is accepted (every term equals 1), which is handy as a sanity case.
    """

    beta: float
    n: int
    m: int = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta < 0:
            raise InvalidParams(f"beta must be finite and nonnegative, got {self.beta}")
        object.__setattr__(self, "m", level_count(self.n))


def mixture_cdf(x, p: ModelParams, n: int):
    """``1/2 Phi(x) + 1/2 Phi((x - sqrt(n) a) / sigma)``; vectorized over ``x``."""
    if n < 1:
        raise InvalidParams("n must be at least 1")
    x = np.asarray(x, dtype=float)
    out = 0.5 * ndtr(x) + 0.5 * ndtr((x - math.sqrt(n) * p.a) / p.sigma)
    return float(out) if out.ndim == 0 else out


def sample_energies(p: ModelParams, n: int, stream: RngStream, size: int) -> np.ndarray:
    """``size`` mixture draws ``Z_j`` for counters ``stream.counter ...``.

    Draw ``j`` uses the same normal and branch bit as level ``j`` in the
    partition-function engine, so the two agree term by term.
    """
    z, comp = stream.normals(size, with_branch=True)
    return np.where(comp == 1, math.sqrt(n) * p.a + p.sigma * z, z)


def sample_energy(p: ModelParams, n: int, stream: RngStream) -> float:
    return float(sample_energies(p, n, stream, 1)[0])


def log_moment(s: float, c: SystemConfig, p: ModelParams) -> float:
    """``log E exp(s beta sqrt(n) Z_1)`` in closed form."""
    sb = s * c.beta
    e1 = 0.5 * sb * sb * c.n
    e2 = sb * p.a * c.n + 0.5 * sb * sb * p.sigma ** 2 * c.n
    return float(np.logaddexp(e1, e2)) - LOG2


def log_mean_partition(c: SystemConfig, p: ModelParams) -> float:
    return math.log(c.m) + log_moment(1.0, c, p)


def log_var_partition(c: SystemConfig, p: ModelParams) -> float:
    """``log Var S_n``; ``-inf`` at ``beta = 0`` where ``S_n = m`` is deterministic."""
    big = log_moment(2.0, c, p)
    small = 2.0 * log_moment(1.0, c, p)
    diff = small - big
    if diff >= 0.0:
        return -math.inf
    return math.log(c.m) + big + math.log(-math.expm1(diff))
