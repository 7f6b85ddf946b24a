"""Spectrally positive stable laws given by their Levy tail ``C x^-alpha``.

Conversions go to the S1 parameterization (Samorodnitsky-Taqqu) with skewness
+1. Sampling uses the Chambers-Mallows-Stuck transform in Weron's form,
driven by counter-based uniforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedAlpha
from .norm import StableSpec
from .rng import RngStream

EULER_GAMMA = 0.5772156649015329
REFERENCE_SIZE = 10_000_000
REFERENCE_SEED = 0x5EED_AB1E


@dataclass(frozen=True)
class StandardStable:
    alpha: float
    scale: float
    skew: float
    location: float


def tail_constant(alpha: float) -> float:
    """``C_alpha`` with ``P(X > x) ~ C_alpha x^-alpha`` for the unit-scale, skew +1 law."""
    if alpha == 1.0:
        return 2.0 / math.pi
    return (1.0 - alpha) / (math.gamma(2.0 - alpha) * math.cos(math.pi * alpha / 2.0))


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise UnsupportedAlpha(f"alpha must lie in (0, 2), got {alpha}")


def standardize(spec: StableSpec) -> StandardStable:
    a = spec.alpha
    _check_alpha(a)
    c = spec.levy_tail_constant
    scale = (c / tail_constant(a)) ** (1.0 / a)
    if a < 1.0:
        loc = spec.drift - c * a / (1.0 - a)
    elif a > 1.0:
        loc = spec.drift
    else:
        loc = spec.drift + c * (1.0 - EULER_GAMMA)
    return StandardStable(a, scale, 1.0, loc)


def _cms_unit(alpha: float, u: np.ndarray, w_u: np.ndarray) -> np.ndarray:
    """Unit-scale, skew +1, location 0 draws in S1 from two uniform arrays."""
    v = math.pi * (u - 0.5)
    w = -np.log(w_u)
    if alpha == 1.0:
        h = math.pi / 2.0 + v
        return (2.0 / math.pi) * (h * np.tan(v) - np.log((math.pi / 2.0) * w * np.cos(v) / h))
    t = math.tan(math.pi * alpha / 2.0)
    b = math.atan(t) / alpha
    s = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
    av = alpha * (v + b)
    return (s * np.sin(av) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - av) / w) ** ((1.0 - alpha) / alpha))


def _from_unit(x: np.ndarray, std: StandardStable) -> np.ndarray:
    if std.alpha == 1.0:
        return std.scale * x + (2.0 / math.pi) * std.scale * math.log(std.scale) + std.location
    return std.scale * x + std.location


def sample_stable_many(spec: StableSpec, stream: RngStream, size: int) -> np.ndarray:
    """``size`` draws; draw ``i`` consumes uniforms ``2i, 2i + 1`` from the stream counter."""
    std = standardize(spec)
    u = stream.uniforms(2 * size)
    return _from_unit(_cms_unit(std.alpha, u[0::2], u[1::2]), std)


def sample_stable(spec: StableSpec, stream: RngStream) -> float:
    return float(sample_stable_many(spec, stream, 1)[0])


@lru_cache(maxsize=8)
def _reference_unit(alpha: float) -> np.ndarray:
    u = RngStream(REFERENCE_SEED, stream_id=0).uniforms(2 * REFERENCE_SIZE)
    x = np.sort(_cms_unit(alpha, u[0::2], u[1::2]))
    x.setflags(write=False)
    return x


def reference_quantiles(spec: StableSpec, probs) -> np.ndarray:
    """Quantiles from a cached, seeded sample of 10^7 draws (linear interpolation)."""
    std = standardize(spec)
    probs = np.asarray(probs, dtype=float)
    if np.any((probs <= 0) | (probs >= 1)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    q = np.quantile(_reference_unit(std.alpha), probs)
    # the map from unit draws is increasing, so it commutes with quantiles
    return _from_unit(q, std)
