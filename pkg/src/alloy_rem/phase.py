"""Phase geometry of the (a, sigma) plane.

Three curves separate the plane,

    b1 = (1 - sigma^2) / sqrt(2),  b2 = sqrt(2) (1 - sigma),  b3 = (1 - sigma^2) / (sqrt(2) sigma),

and b1 < b2 < b3 whenever sigma != 1 (all three vanish at sigma = 1). Zones:

    Z1  a > b3
    Z4  a < b1
    Z2  sigma > 1, b2 < a < b3        Z3  sigma > 1, b1 < a < b2
    Z5  sigma < 1, b1 < a < b2        Z6  sigma < 1, b2 < a < b3
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import DiscriminantNegative
from .model import ModelParams

SQRT2 = math.sqrt(2.0)
BOUNDARY_TOL = 1e-12


class Zone(str, Enum):
    Z1 = "Z1"
    Z2 = "Z2"
    Z3 = "Z3"
    Z4 = "Z4"
    Z5 = "Z5"
    Z6 = "Z6"
    BOUNDARY = "Boundary"


class Component(str, Enum):
    STANDARD = "standard"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class ZoneReport:
    zone: Zone
    beta_plus: float
    beta_circ: float | None = None
    beta_star: float | None = None
    beta_diamond: float | None = None
    boundary_values: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def to_dict(self) -> dict:
        b1, b2, b3 = self.boundary_values
        return {
            "zone": self.zone.value,
            "beta_plus": self.beta_plus,
            "beta_circ": self.beta_circ,
            "beta_star": self.beta_star,
            "beta_diamond": self.beta_diamond,
            "boundary_values": {"b1": b1, "b2": b2, "b3": b3},
        }


def boundary_values(p: ModelParams) -> tuple[float, float, float]:
    s = p.sigma
    return (1 - s * s) / SQRT2, SQRT2 * (1 - s), (1 - s * s) / (SQRT2 * s)


def _near(x: float, y: float, scale: float) -> bool:
    return abs(x - y) <= BOUNDARY_TOL * scale


def is_classical(p: ModelParams) -> bool:
    return _near(p.a, 0.0, 1.0) and _near(p.sigma, 1.0, 1.0)


def classify_zone(p: ModelParams) -> Zone:
    b1, b2, b3 = boundary_values(p)
    tol = max(1.0, abs(p.a))
    if _near(p.sigma, 1.0, 1.0) or any(_near(p.a, b, tol) for b in (b1, b2, b3)):
        return Zone.BOUNDARY
    if p.a > b3:
        return Zone.Z1
    if p.a < b1:
        return Zone.Z4
    if p.sigma > 1:
        return Zone.Z2 if p.a > b2 else Zone.Z3
    return Zone.Z6 if p.a > b2 else Zone.Z5


def beta_circ(p: ModelParams) -> float | None:
    """``2a / (1 - sigma^2)`` when it is defined and positive."""
    d = 1.0 - p.sigma ** 2
    if d == 0.0:
        return None
    v = 2.0 * p.a / d
    return v if v > 0 else None


def beta_star(p: ModelParams) -> float:
    """Smaller root of ``b^2 - 2 (sigma sqrt2 + a) b + 2``."""
    c = p.sigma * SQRT2 + p.a
    # factored discriminant: exact zero at the classical point
    disc = (c - SQRT2) * (c + SQRT2)
    if disc < 0 or c <= 0:
        raise DiscriminantNegative(f"beta_* undefined at a={p.a}, sigma={p.sigma}")
    return c - math.sqrt(disc)


def beta_diamond(p: ModelParams) -> float:
    """Smaller root of ``sigma^2 b^2 - 2 (sqrt2 - a) b + 2``."""
    c = SQRT2 - p.a
    disc = (c - SQRT2 * p.sigma) * (c + SQRT2 * p.sigma)
    if disc < 0 or c <= 0:
        raise DiscriminantNegative(f"beta_diamond undefined at a={p.a}, sigma={p.sigma}")
    return (c - math.sqrt(disc)) / p.sigma ** 2


def beta_plus(p: ModelParams) -> float:
    """Upper end of the LLN range; continuous across the zone boundaries."""
    b1, _, b3 = boundary_values(p)
    if p.a >= b3:
        return SQRT2 / p.sigma
    if p.a <= b1:
        return SQRT2
    return 2.0 * p.a / (1.0 - p.sigma ** 2)


def _optional(fn, p):
    try:
        return fn(p)
    except DiscriminantNegative:
        return None


def critical_betas(p: ModelParams) -> ZoneReport:
    return ZoneReport(
        zone=classify_zone(p),
        beta_plus=beta_plus(p),
        beta_circ=beta_circ(p),
        beta_star=_optional(beta_star, p),
        beta_diamond=_optional(beta_diamond, p),
        boundary_values=boundary_values(p),
    )


def p1(beta: float) -> float:
    return 1.0 + beta * beta / 2.0 if beta <= SQRT2 else SQRT2 * beta


def p2(beta: float, p: ModelParams) -> float:
    if beta <= SQRT2 / p.sigma:
        return 1.0 + beta * p.a + beta * beta * p.sigma ** 2 / 2.0
    return (p.sigma * SQRT2 + p.a) * beta


def free_energy(beta: float, p: ModelParams) -> float:
    return max(p1(beta), p2(beta, p))


# regime --------------------------------------------------------------------

@dataclass(frozen=True)
class StableThreshold:
    threshold: float
    component: Component
    formula: str  # tail-index formula as text

    def alpha(self, beta: float, p: ModelParams) -> float:
        if self.component is Component.STANDARD:
            return SQRT2 / beta
        return SQRT2 / (beta * p.sigma)


def stable_threshold(p: ModelParams) -> StableThreshold | None:
    """Threshold above which the stable limit holds, or None on the case-splitting line.

    Case (i) ``a < b2``: the standard component dominates the fluctuations.
    Case (ii) ``a > b2``: the shifted one does.
    """
    b1, b2, b3 = boundary_values(p)
    if is_classical(p):
        return StableThreshold(SQRT2 / 2, Component.STANDARD, "sqrt(2)/beta")
    if _near(p.a, b2, max(1.0, abs(p.a))):
        return None
    if p.a < b2:
        thr = beta_diamond(p) / 2 if (p.sigma < 1 and p.a > b1) else SQRT2 / 2
        return StableThreshold(thr, Component.STANDARD, "sqrt(2)/beta")
    thr = beta_star(p) / 2 if (p.sigma > 1 and p.a < b3) else SQRT2 / (2 * p.sigma)
    return StableThreshold(thr, Component.SHIFTED, "sqrt(2)/(beta*sigma)")


@dataclass(frozen=True)
class LLNInfo:
    holds_below: float
    holds: bool
    critical: bool
    critical_limit: float = 0.5


@dataclass(frozen=True)
class CLTInfo:
    holds_below: float
    holds: bool
    critical: bool
    critical_variance: float = 0.5


@dataclass(frozen=True)
class StableInfo:
    holds_above: float | None
    holds: bool
    tail_index: float | None
    dominant: Component | None
    formula: str | None


@dataclass(frozen=True)
class RegimeReport:
    beta: float
    params: ModelParams
    zone: Zone
    boundary: bool
    classical: bool
    lln: LLNInfo
    clt: CLTInfo
    stable: StableInfo
    gaps: list[tuple[float, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def covered(self) -> bool:
        """Some statement (LLN, CLT, stable or a critical limit) applies at beta."""
        return (not self.boundary) and (
            self.lln.holds or self.lln.critical or self.clt.holds or self.clt.critical
            or self.stable.holds)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "a": self.params.a,
            "sigma": self.params.sigma,
            "zone": self.zone.value,
            "boundary": self.boundary,
            "classical": self.classical,
            "lln": {"holds_below": self.lln.holds_below, "holds": self.lln.holds,
                    "critical": self.lln.critical, "critical_limit": self.lln.critical_limit},
            "clt": {"holds_below": self.clt.holds_below, "holds": self.clt.holds,
                    "critical": self.clt.critical,
                    "critical_variance": self.clt.critical_variance},
            "stable": {"holds_above": self.stable.holds_above, "holds": self.stable.holds,
                       "tail_index": self.stable.tail_index,
                       "dominant": self.stable.dominant.value if self.stable.dominant else None,
                       "tail_index_formula": self.stable.formula},
            "gaps": [list(g) for g in self.gaps],
            "notes": list(self.notes),
        }


def _same(x: float, y: float) -> bool:
    return abs(x - y) <= BOUNDARY_TOL * max(1.0, abs(y))


def regime(beta: float, p: ModelParams) -> RegimeReport:
    """Which limit statements apply at ``(a, sigma, beta)``.

    The classical point (0, 1) lies on every boundary curve but is covered by
    the classical REM results, so it is reported as such. Any other boundary
    point gets a report with every ``holds`` flag False.
    """
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive, got {beta}")
    zone = classify_zone(p)
    classical = is_classical(p)
    bp = beta_plus(p)
    st = stable_threshold(p)
    thr = st.threshold if st else None
    boundary = zone is Zone.BOUNDARY and not classical
    notes = []

    gaps = []
    if thr is not None and thr > bp / 2 and not _same(thr, bp / 2):
        gaps.append((bp / 2, thr))

    live = not boundary
    lln = LLNInfo(bp, live and beta < bp and not _same(beta, bp), live and _same(beta, bp))
    clt = CLTInfo(bp / 2, live and beta < bp / 2 and not _same(beta, bp / 2),
                  live and _same(beta, bp / 2))
    stable_holds = live and thr is not None and beta > thr and not _same(beta, thr)
    stable = StableInfo(
        holds_above=thr,
        holds=stable_holds,
        tail_index=st.alpha(beta, p) if st is not None else None,
        dominant=st.component if st else None,
        formula=st.formula if st else None,
    )
    if boundary:
        notes.append("parameters on a zone boundary; no limit theorem is claimed")
    elif gaps and gaps[0][0] < beta <= gaps[0][1]:
        notes.append("beta lies in a fluctuation gap; neither CLT nor stable limit is proved")
    if thr is not None and live and _same(beta, thr) and not clt.critical:
        notes.append("beta equals the stable threshold; not covered")
    return RegimeReport(beta, p, zone, boundary, classical, lln, clt, stable, gaps, notes)
