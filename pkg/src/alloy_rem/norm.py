"""Normalizing sequences, centerings and the truncated-moment functionals.

Scales are kept as logarithms throughout. ``gamma_n(beta) = (2n)^(-beta/(2 sqrt2)) e^(sqrt2 beta n)``
is the classical stable scale; the shifted component uses ``e^(beta a n) gamma_n(beta sigma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import log_ndtr

from .errors import NotCovered, NotStableRegime, UnsupportedAlpha
from .model import LOG2, MAX_N, ModelParams, SystemConfig, level_count, log_mean_partition, \
    log_var_partition
from .phase import SQRT2, Component, RegimeReport

LEVY_C = 1.0 / math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_TAIL_CROSSOVER = 8.0


class RegimeTag(str, Enum):
    LLN = "LLN"
    CLT = "CLT"
    STABLE_STANDARD = "StableStandard"
    STABLE_SHIFTED = "StableShifted"


@dataclass(frozen=True)
class StableSpec:
    """One-sided stable law with Levy tail ``nu((x, inf)) = C x^-alpha``.

    ``drift`` follows the usual convention of the limit theorems: for
    ``alpha < 1`` it is the drift with truncation at 1, so the uncompensated
    Poisson sum of the points has drift ``C alpha / (1 - alpha)``; for
    ``alpha > 1`` it is the mean; for ``alpha = 1`` truncation at 1 again.
    """

    alpha: float
    levy_tail_constant: float = LEVY_C
    drift: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise UnsupportedAlpha(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.levy_tail_constant <= 0:
            raise ValueError("Levy tail constant must be positive")
        if self.drift < 0:
            raise ValueError("drift must be nonnegative")


@dataclass(frozen=True)
class Normalization:
    """Centering and scale for ``(S_n - center) / scale``.

    ``log_scale`` is the scale actually used. For stable regimes of the
    mixture the dominating component holds about half of the levels, so its
    tail constant is ``C/2``; ``log_scale`` then includes the factor
    ``2^(-1/alpha)`` that restores the constant ``C``, and ``log_scale_raw``
    is the bare ``gamma_n`` or ``e^(beta a n) gamma_n(beta sigma)``.
    """

    regime_tag: RegimeTag
    log_scale: float
    log_center: float  # -inf when the centering is zero
    log_scale_raw: float
    alpha: float | None = None
    drift: float = 0.0
    critical: bool = False

    @property
    def center_is_zero(self) -> bool:
        return self.log_center == -math.inf

    def apply(self, log_s):
        return normalize(log_s, self)

    def to_dict(self) -> dict:
        return {
            "regime_tag": self.regime_tag.value,
            "log_scale": self.log_scale,
            "log_scale_raw": self.log_scale_raw,
            "log_center": None if self.center_is_zero else self.log_center,
            "center_is_zero": self.center_is_zero,
            "alpha": self.alpha,
            "drift": self.drift,
            "critical": self.critical,
        }


def log_level_count(n: int) -> float:
    """``log floor(e^n)``; beyond the exact range the floor shifts it by < e^-n."""
    if n <= MAX_N:
        return math.log(level_count(n))
    return float(n)


def log_gamma(beta: float, n: float) -> float:
    return SQRT2 * beta * n - beta / (2.0 * SQRT2) * math.log(2.0 * n)


def log_gamma_shifted(beta: float, n: float, p: ModelParams) -> float:
    return beta * p.a * n + log_gamma(beta * p.sigma, n)


def truncated_moment(s: float, tau: float, beta: float, n: int, log_scale: float) -> float:
    """Log of ``J_n(s, tau) = m E[(X/scale)^s 1{X <= tau scale}]`` for ``X = e^(beta sqrt(n) xi)``.

    Returns ``-inf`` when the value underflows to zero.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    rn = math.sqrt(n)
    arg = (log_scale + math.log(tau)) / (beta * rn) - beta * s * rn
    return (log_level_count(n) + 0.5 * beta * beta * n * s * s - s * log_scale
            + float(log_ndtr(arg)))


def truncated_moment_shifted(s: float, tau: float, beta: float, n: int, p: ModelParams,
                             log_scale: float) -> float:
    """Log of the shifted-component analogue, ``X = e^(beta (a n + sigma sqrt(n) xi))``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    rn = math.sqrt(n)
    bs = beta * p.sigma
    arg = (log_scale + math.log(tau) - beta * p.a * n) / (bs * rn) - bs * s * rn
    return (log_level_count(n) + beta * p.a * n * s + 0.5 * bs * bs * n * s * s
            - s * log_scale + float(log_ndtr(arg)))


def log_normal_sf(k: float) -> float:
    """``log(1 - Phi(k))``; asymptotic series beyond the crossover at 8."""
    if k <= _TAIL_CROSSOVER:
        return float(log_ndtr(-k))
    # 1 - Phi(k) = phi(k)/k * (1 - 1/k^2 + 3/k^4 - 15/k^6 + 105/k^8 - 945/k^10 + ...)
    r = 1.0 / (k * k)
    series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))))
    return -0.5 * k * k - _LOG_SQRT_2PI - math.log(k) + math.log(series)


def tail_sum(x: float, beta: float, n: int, log_scale: float) -> float:
    """``m P(e^(beta sqrt(n) xi) > scale x)``."""
    if x <= 0:
        raise ValueError("x must be positive")
    kappa = (log_scale + math.log(x)) / (beta * math.sqrt(n))
    return math.exp(log_level_count(n) + log_normal_sf(kappa))


def tail_sum_shifted(x: float, beta: float, n: int, p: ModelParams, log_scale: float) -> float:
    """``m P(e^(beta (a n + sigma sqrt(n) xi)) > scale x)``."""
    if x <= 0:
        raise ValueError("x must be positive")
    kappa = (log_scale + math.log(x) - beta * p.a * n) / (beta * p.sigma * math.sqrt(n))
    return math.exp(log_level_count(n) + log_normal_sf(kappa))


# centering -----------------------------------------------------------------

def _effective_beta(beta: float, p: ModelParams, dominant: Component) -> float:
    return beta if dominant is Component.STANDARD else beta * p.sigma


def stable_drift(alpha: float, c: float = LEVY_C) -> float:
    """Drift of the limit law: ``C alpha / (1 - alpha)`` below 1, else 0."""
    return c * alpha / (1.0 - alpha) if alpha < 1.0 else 0.0


def stable_spec_for(beta: float, p: ModelParams, regime: RegimeReport) -> StableSpec:
    if not regime.stable.holds:
        raise NotStableRegime(f"no stable limit at beta={beta}, a={p.a}, sigma={p.sigma}")
    alpha = regime.stable.tail_index
    if abs(alpha - 1.0) < 1e-12:
        alpha = 1.0
    return StableSpec(alpha, LEVY_C, stable_drift(alpha))


def _log_component_means(beta: float, n: int, p: ModelParams) -> tuple[float, float]:
    # E S^1 and E S^2: each component receives m/2 levels on average
    log_half_m = log_level_count(n) - LOG2
    return (log_half_m + 0.5 * beta * beta * n,
            log_half_m + beta * p.a * n + 0.5 * (beta * p.sigma) ** 2 * n)


def centering(beta: float, n: int, p: ModelParams, regime: RegimeReport,
              kind: RegimeTag | str | None = None) -> Normalization:
    """Normalization for ``(S_n - center) / scale`` at ``(beta, n)``.

    Without ``kind`` the finest applicable statement is used: CLT, then
    stable, then LLN. Stable centering applies the classical table to the
    dominating component and adds the exact mean of the other one.
    """
    if kind is not None:
        kind = RegimeTag(kind)
    c = SystemConfig(beta, n) if n <= MAX_N else None
    if regime.boundary:
        raise NotCovered("boundary parameters: no limit theorem applies")

    clt_ok = regime.clt.holds or regime.clt.critical
    lln_ok = regime.lln.holds or regime.lln.critical
    if kind is None:
        if clt_ok:
            kind = RegimeTag.CLT
        elif regime.stable.holds:
            kind = (RegimeTag.STABLE_STANDARD if regime.stable.dominant is Component.STANDARD
                    else RegimeTag.STABLE_SHIFTED)
        elif lln_ok:
            kind = RegimeTag.LLN
        else:
            raise NotCovered(f"beta={beta} is not covered (gap or stable threshold)")

    if kind is RegimeTag.LLN:
        if not lln_ok:
            raise NotCovered("LLN does not hold at this beta")
        lm = _log_mean(beta, n, p, c)
        return Normalization(kind, lm, lm, lm, critical=regime.lln.critical)
    if kind is RegimeTag.CLT:
        if not clt_ok:
            raise NotCovered("CLT does not hold at this beta")
        if c is None:
            raise NotCovered("CLT normalization needs n within the exact range")
        lm = log_mean_partition(c, p)
        ls = 0.5 * log_var_partition(c, p)
        return Normalization(kind, ls, lm, ls, critical=regime.clt.critical)
    return _stable_normalization(beta, n, p, regime, kind)


def _log_mean(beta, n, p, c):
    if c is not None:
        return log_mean_partition(c, p)
    return float(np.logaddexp(*_log_component_means(beta, n, p)))


def _stable_normalization(beta, n, p, regime, kind) -> Normalization:
    if not regime.stable.holds:
        raise NotCovered("stable limit does not hold at this beta")
    dominant = regime.stable.dominant
    want = (Component.STANDARD if kind is RegimeTag.STABLE_STANDARD else Component.SHIFTED)
    if not regime.classical and dominant is not want:
        raise NotCovered(f"the {want.value} component does not dominate here")
    spec = stable_spec_for(beta, p, regime)
    b = _effective_beta(beta, p, dominant)
    if regime.classical:
        log_raw = log_gamma(beta, n)
        log_scale = log_raw
        log_dom = _log_mean(beta, n, p, SystemConfig(beta, n) if n <= MAX_N else None)
        log_sub = -math.inf
    else:
        log_raw = log_gamma(beta, n) if dominant is Component.STANDARD \
            else log_gamma_shifted(beta, n, p)
        log_scale = log_raw - LOG2 / spec.alpha
        m1, m2 = _log_component_means(beta, n, p)
        log_dom, log_sub = (m1, m2) if dominant is Component.STANDARD else (m2, m1)

    if _same(b, SQRT2):
        log_dom = log_dom - LOG2
    elif b > SQRT2:
        log_dom = -math.inf
    log_center = float(np.logaddexp(log_dom, log_sub))
    return Normalization(kind, log_scale, log_center, log_raw, spec.alpha, spec.drift)


def _same(x: float, y: float) -> bool:
    return abs(x - y) <= 1e-12 * max(1.0, abs(y))


def normalize(log_s, norm: Normalization):
    """``(S - center) / scale`` from ``log S`` without cancellation near the center."""
    log_s = np.asarray(log_s, dtype=float)
    if norm.center_is_zero:
        out = np.exp(log_s - norm.log_scale)
    else:
        d = log_s - norm.log_center
        with np.errstate(divide="ignore"):
            out = np.sign(d) * np.exp(np.log(np.abs(np.expm1(d))) + norm.log_center
                                      - norm.log_scale)
    return float(out) if out.ndim == 0 else out
