import math

import numpy as np
import pytest
from scipy import integrate, optimize, special, stats

from alloy_rem.errors import UnsupportedAlpha
from alloy_rem.norm import LEVY_C, StableSpec
from alloy_rem.rng import RngStream
from alloy_rem.stable import (EULER_GAMMA, reference_quantiles, sample_stable,
                              sample_stable_many, standardize, tail_constant)

LEVY1_C = math.sqrt(2 / math.pi)  # Levy(0, 1) has tail P(X > x) ~ sqrt(2/pi) x^-1/2
LEVY1 = StableSpec(0.5, LEVY1_C, drift=LEVY1_C)  # drift = C alpha/(1-alpha): no extra shift


def levy_quantile(p, c=1.0):
    return c / (2 * special.erfcinv(p) ** 2)


def test_unsupported_alpha():
    for a in (0.0, 2.0, 2.5, -1.0):
        with pytest.raises(UnsupportedAlpha):
            StableSpec(a)


def test_standardize_levy():
    std = standardize(LEVY1)
    assert std.alpha == 0.5 and std.skew == 1.0
    assert std.scale == pytest.approx(1.0, rel=1e-12)
    assert std.location == pytest.approx(0.0, abs=1e-12)


def test_standardize_scaling():
    for a in (0.3, 0.5, 1.0, 1.5, 1.9):
        s1 = standardize(StableSpec(a, 0.4)).scale
        s2 = standardize(StableSpec(a, 0.8)).scale
        assert s2 / s1 == pytest.approx(2 ** (1 / a), rel=1e-13)


def test_tail_constant_matches_scipy_tail():
    # P(X > x) x^alpha -> C_alpha for the unit S1 law; scipy's sf loses accuracy far out
    for a, x, rel in ((0.6, 100.0, 0.03), (1.5, 50.0, 0.005)):
        sf = stats.levy_stable.sf(x, a, 1.0)
        assert sf * x ** a == pytest.approx(tail_constant(a), rel=rel)


@pytest.mark.parametrize("a", [0.2, 0.6, 0.99, 1.01, 1.5, 1.9])
def test_tail_constant_reflection_form(a):
    assert tail_constant(a) == pytest.approx(2 * math.gamma(a) * math.sin(math.pi * a / 2)
                                             / math.pi, rel=1e-12)


def _lk_exponent_imag(theta, c, b):
    """Imaginary part of the Levy-Khintchine exponent, measure c x^-2 dx, truncation at 1."""
    inner, _ = integrate.quad(lambda x: (math.sin(theta * x) - theta * x) / x ** 2, 0, 1,
                              epsabs=1e-13, limit=200)
    outer, _ = integrate.quad(lambda x: 1 / x ** 2, 1, np.inf, weight="sin", wvar=theta)
    return b * theta + c * (inner + outer)


def _lk_exponent_real(theta, c):
    val, _ = integrate.quad(lambda x: (math.cos(theta * x) - 1) / x ** 2, 0, 1, limit=200)
    tail, _ = integrate.quad(lambda x: 1 / x ** 2, 1, np.inf, weight="cos", wvar=theta)
    tail -= 1.0  # minus the integral of x^-2 over (1, inf)
    return c * (val + tail)


@pytest.mark.parametrize("drift", [0.0, 0.3])
def test_alpha_one_conversion_by_quadrature(drift):
    spec = StableSpec(1.0, LEVY_C, drift)
    std = standardize(spec)
    for theta in (0.4, 1.0, 2.5):
        re_s1 = -std.scale * theta
        im_s1 = -std.scale * (2 / math.pi) * theta * math.log(theta) + std.location * theta
        assert _lk_exponent_real(theta, LEVY_C) == pytest.approx(re_s1, rel=1e-6)
        assert _lk_exponent_imag(theta, LEVY_C, drift) == pytest.approx(im_s1, rel=1e-6,
                                                                        abs=1e-9)
    assert std.location == pytest.approx(drift + LEVY_C * (1 - EULER_GAMMA))


def test_levy_sample_ks():
    x = sample_stable_many(LEVY1, RngStream(21), 1_000_000)
    assert stats.kstest(x, stats.levy.cdf).statistic < 0.002


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.2, 1.7])
def test_sampler_vs_scipy(alpha):
    spec = StableSpec(alpha, 0.7, 0.2)
    std = standardize(spec)
    x = sample_stable_many(spec, RngStream(22), 100_000)
    y = stats.levy_stable.rvs(alpha, 1.0, loc=std.location, scale=std.scale, size=100_000,
                              random_state=np.random.default_rng(5))
    assert stats.ks_2samp(x, y).statistic < 0.0073  # 1% two-sample critical value


def test_near_gaussian_alpha():
    spec = StableSpec(1.95)
    x = sample_stable_many(spec, RngStream(23), 1_000_000)
    assert stats.skew(x) > 0
    # Hill is useless this close to 2: the Pareto regime starts too far out
    std = standardize(spec)
    y = stats.levy_stable.rvs(1.95, 1.0, loc=std.location, scale=std.scale, size=100_000,
                              random_state=np.random.default_rng(6))
    assert stats.ks_2samp(x[:100_000], y).statistic < 0.0073


def test_drift_shifts_quantiles():
    a = sample_stable_many(StableSpec(1.3, drift=0.0), RngStream(24), 1000)
    b = sample_stable_many(StableSpec(1.3, drift=0.75), RngStream(24), 1000)
    assert np.allclose(b - a, 0.75, rtol=0, atol=1e-12)
    assert sample_stable(StableSpec(1.3), RngStream(24)) == a[0]


def test_sampler_deterministic():
    s = StableSpec(0.8)
    assert np.array_equal(sample_stable_many(s, RngStream(3), 50),
                          sample_stable_many(s, RngStream(3), 50))


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_stability_under_summation(alpha):
    spec = StableSpec(alpha, drift=0.0 if alpha > 1 else LEVY_C * alpha / (1 - alpha))
    k = 4
    x = sample_stable_many(spec, RngStream(30), 100_000)
    y = sample_stable_many(spec, RngStream(31), 100_000 * k).reshape(-1, k)
    assert stats.ks_2samp(x, y.sum(axis=1) / k ** (1 / alpha)).statistic < 0.01


@pytest.mark.parametrize("alpha", [0.5, 1.2, 1.8])
def test_tail_law(alpha):
    spec = StableSpec(alpha, drift=0.0 if alpha > 1 else LEVY_C * alpha / (1 - alpha))
    q = reference_quantiles(spec, [0.999])[0]
    x = sample_stable_many(spec, RngStream(32), 2_000_000)
    freq = np.mean(x > q)
    assert freq == pytest.approx(LEVY_C * q ** -alpha, rel=0.2)


def test_reference_median_levy():
    med = reference_quantiles(LEVY1, [0.5])[0]
    assert med == pytest.approx(levy_quantile(0.5), rel=0.005)
    assert levy_quantile(0.5) == pytest.approx(2.1981, abs=1e-4)


def test_reference_quantiles_monotone():
    q = reference_quantiles(StableSpec(1.1), np.linspace(0.01, 0.99, 99))
    assert np.all(np.diff(q) >= 0)
    with pytest.raises(ValueError):
        reference_quantiles(StableSpec(1.1), [0.0])


def test_reference_quantiles_vs_cdf_inversion():
    spec = StableSpec(1.4, 0.5, 0.1)
    std = standardize(spec)
    for p in (0.1, 0.5, 0.9):
        q = reference_quantiles(spec, [p])[0]
        ref = optimize.brentq(lambda t: stats.levy_stable.cdf(t, 1.4, 1.0, std.location,
                                                              std.scale) - p, -20, 20)
        assert q == pytest.approx(ref, rel=0.01, abs=1e-3)
