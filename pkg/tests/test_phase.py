import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from alloy_rem.errors import DiscriminantNegative, InvalidParams
from alloy_rem.model import ModelParams
from alloy_rem.phase import (Component, Zone, beta_diamond, beta_plus, beta_star, classify_zone,
                             critical_betas, free_energy, p1, regime, stable_threshold)
from alloy_rem.verify import continuity_points, reference_zone_grid

R2 = math.sqrt(2)
off_boundary = st.tuples(st.floats(-4, 4), st.floats(0.05, 3)).filter(
    lambda t: reference_zone_grid(np.array(t[0]), np.array(t[1])) != 0)


# classify_zone

def test_zone_examples():
    assert classify_zone(ModelParams(1, 2)) is Zone.Z1
    assert (1 - 4) / (2 * R2) == pytest.approx(-1.0607, abs=1e-4)
    assert classify_zone(ModelParams(-3, 2)) is Zone.Z4
    assert classify_zone(ModelParams(0, 1)) is Zone.BOUNDARY


def test_zone_each_label():
    # one representative per zone, chosen from the separating values by hand
    assert classify_zone(ModelParams(-1.3, 2)) is Zone.Z2   # b2=-1.414 < a < b3=-1.061
    assert classify_zone(ModelParams(-1.8, 2)) is Zone.Z3   # b1=-2.121 < a < b2
    assert classify_zone(ModelParams(0.6, 0.5)) is Zone.Z5  # b1=0.530 < a < b2=0.707
    assert classify_zone(ModelParams(0.9, 0.5)) is Zone.Z6  # b2 < a < b3=1.061
    assert classify_zone(ModelParams(0.2, 0.5)) is Zone.Z4


def test_boundary_values_exact():
    s = 2.0
    assert classify_zone(ModelParams((1 - s * s) / R2, s)) is Zone.BOUNDARY
    assert classify_zone(ModelParams(R2 * (1 - s), s)) is Zone.BOUNDARY
    assert classify_zone(ModelParams((1 - s * s) / (R2 * s), s)) is Zone.BOUNDARY
    assert classify_zone(ModelParams(0.5, 1.0)) is Zone.BOUNDARY


def test_invalid_sigma():
    with pytest.raises(InvalidParams):
        classify_zone(ModelParams(0, -1))


def test_grid_tiles_plane():
    a = np.linspace(-4, 4, 400)
    s = np.linspace(3 / 400, 3, 400)
    aa, ss = np.meshgrid(a, s, indexing="ij")
    ref = reference_zone_grid(aa, ss)
    assert set(np.unique(ref)) >= {1, 2, 3, 4, 5, 6}


@given(off_boundary)
def test_zone_matches_reference(t):
    a, s = t
    names = {1: Zone.Z1, 2: Zone.Z2, 3: Zone.Z3, 4: Zone.Z4, 5: Zone.Z5, 6: Zone.Z6}
    assert classify_zone(ModelParams(a, s)) is names[int(reference_zone_grid(np.array(a),
                                                                            np.array(s)))]


# critical betas

def test_critical_examples():
    assert critical_betas(ModelParams(-1, 2)).beta_circ == pytest.approx(2 / 3, rel=1e-15)
    assert beta_star(ModelParams(0, 1)) == pytest.approx(R2, rel=1e-15)
    assert critical_betas(ModelParams(1, 2)).beta_plus == pytest.approx(R2 / 2, rel=1e-15)
    assert critical_betas(ModelParams(-3, 2)).beta_plus == pytest.approx(R2, rel=1e-15)


def test_discriminant_errors():
    with pytest.raises(DiscriminantNegative):
        beta_star(ModelParams(-0.5, 0.5))  # sigma sqrt2 + a < sqrt2
    with pytest.raises(DiscriminantNegative):
        beta_diamond(ModelParams(0.9, 0.5))  # sqrt2 - a < sqrt2 sigma
    rep = critical_betas(ModelParams(0.9, 0.5))
    assert rep.beta_diamond is None


@given(off_boundary)
def test_roots_solve_their_quadratics(t):
    p = ModelParams(*t)
    z = classify_zone(p)
    if z is Zone.Z2:
        b = beta_star(p)
        assert b * b - 2 * (p.sigma * R2 + p.a) * b + 2 == pytest.approx(0, abs=1e-9)
    if z is Zone.Z5:
        b = beta_diamond(p)
        assert p.sigma ** 2 * b * b - 2 * (R2 - p.a) * b + 2 == pytest.approx(0, abs=1e-9)


@given(off_boundary)
def test_beta_plus_trichotomy(t):
    p = ModelParams(*t)
    z = classify_zone(p)
    bp = beta_plus(p)
    if z is Zone.Z1:
        assert bp == pytest.approx(R2 / p.sigma)
    elif z is Zone.Z4:
        assert bp == R2
    else:
        assert bp == pytest.approx(2 * p.a / (1 - p.sigma ** 2))


@given(st.floats(0.1, 3))
def test_beta_plus_continuous_across_b1_b3(s):
    assume(abs(s - 1) > 1e-3)
    b1 = (1 - s * s) / R2
    b3 = b1 / s
    for b in (b1, b3):
        lo = beta_plus(ModelParams(b - 1e-9, s))
        hi = beta_plus(ModelParams(b + 1e-9, s))
        assert lo == pytest.approx(hi, abs=1e-6)


# free energy

def test_free_energy_examples():
    assert p1(R2) == pytest.approx(2.0, rel=1e-15)
    assert p1(R2 * (1 + 1e-15)) == pytest.approx(2.0, rel=1e-12)
    assert free_energy(1.0, ModelParams(0, 1)) == 1.5
    assert free_energy(0.3, ModelParams(0.2, 0.5)) == pytest.approx(1.07125, rel=1e-14)


@given(st.floats(0.01, 6))
def test_free_energy_classical(beta):
    expect = 1 + beta ** 2 / 2 if beta <= R2 else R2 * beta
    assert free_energy(beta, ModelParams(0, 1)) == pytest.approx(expect, rel=1e-15)


@given(st.floats(-4, 4), st.floats(0.1, 3))
def test_free_energy_continuous_at_branch_points(a, s):
    p = ModelParams(a, s)
    for b in continuity_points(p):
        eps = 1e-8
        assert abs(free_energy(b + eps, p) - free_energy(b - eps, p)) < 1e-6


@given(st.floats(-4, 4), st.floats(0.1, 3))
def test_free_energy_convex(a, s):
    p = ModelParams(a, s)
    b = np.linspace(0.01, 5, 300)
    f = np.array([free_energy(x, p) for x in b])
    assert np.all(np.diff(f, 2) >= -1e-9)


# regime

def test_regime_classical_clt():
    r = regime(0.5, ModelParams(0, 1))
    assert r.classical and not r.boundary
    assert r.lln.holds and r.clt.holds and not r.stable.holds


def test_regime_alloy_clt():
    r = regime(0.3, ModelParams(1, 2))
    assert r.clt.holds_below == pytest.approx(R2 / 4)
    assert r.clt.holds


def test_regime_case_i_stable():
    r = regime(1.0, ModelParams(-3, 2))
    assert r.stable.holds
    assert r.stable.dominant is Component.STANDARD
    assert r.stable.tail_index == pytest.approx(R2)
    assert r.stable.holds_above == pytest.approx(R2 / 2)


def test_regime_case_ii_stable():
    r = regime(1.0, ModelParams(1, 2))
    assert r.stable.holds and r.stable.dominant is Component.SHIFTED
    assert r.stable.tail_index == pytest.approx(R2 / 2)
    assert r.stable.holds_above == pytest.approx(R2 / 4)


def test_regime_critical_flags():
    r = regime(R2, ModelParams(0, 1))
    assert r.lln.critical and not r.lln.holds and r.stable.holds
    r = regime(R2 / 2, ModelParams(0, 1))
    assert r.clt.critical and not r.clt.holds and not r.stable.holds


def test_regime_boundary_claims_nothing():
    r = regime(1.0, ModelParams(0.5, 1.0))
    assert r.boundary and not r.covered
    assert r.notes


def test_zone3_and_zone5_thresholds():
    assert stable_threshold(ModelParams(-1.8, 2)).threshold == pytest.approx(R2 / 2)
    p = ModelParams(0.6, 0.5)
    assert stable_threshold(p).threshold == pytest.approx(beta_diamond(p) / 2)


def test_gap_reported():
    p = ModelParams(0.6, 0.5)  # zone 5: beta_diamond/2 > beta_circ/2
    r = regime(0.5, p)
    assert r.gaps
    lo, hi = r.gaps[0]
    assert lo == pytest.approx(beta_plus(p) / 2)
    assert hi == pytest.approx(beta_diamond(p) / 2)
    mid = regime((lo + hi) / 2, p)
    assert not (mid.clt.holds or mid.stable.holds)


@given(off_boundary, st.floats(0.01, 5))
def test_regime_consistency(t, beta):
    p = ModelParams(*t)
    r = regime(beta, p)
    assert r.lln.holds_below == critical_betas(p).beta_plus
    assert r.lln.holds_below == 2 * r.clt.holds_below
    if r.stable.holds:
        assert 0 < r.stable.tail_index < 2
        assert not r.clt.holds
    # thresholds never overlap: the CLT range ends before the stable range starts
    assert r.stable.holds_above >= r.clt.holds_below - 1e-12
