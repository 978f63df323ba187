import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from couette_lab.multipliers import ResonanceIndex, WeightParams, capital_E, growth_factor_g, log_G
from couette_lab.toy import (ToyState, integrate_toy_pair, log_total_growth, regime, toy_divergence,
                             total_growth_scan)


def _G_mp(m, eta, nu, beta):
    mpmath.mp.dps = 40
    a, m = mpmath.mpf(eta), mpmath.mpf(m)
    nu3 = mpmath.cbrt(mpmath.mpf(nu))
    tm = 2 * a / (2 * m + 1)
    F = (1 + (nu3 * tm) ** 2) ** (-(1 + mpmath.mpf(beta)) / 2) * nu3 * a / m**2
    dm, dp = a / ((2 * m + 1) * m), a / ((2 * m - 1) * m)
    return mpmath.exp(F * (mpmath.atan(dp) + mpmath.atan(dm)))


def test_G2_at_eta12_matches_high_precision_oracle():
    p = WeightParams(1e-3, 0.5)
    oracle = float(_G_mp(2, 12.0, 1e-3, 0.5))
    assert abs(oracle - 1.664) < 1e-3
    assert math.exp(log_G(2, 12.0, p)) == pytest.approx(oracle, rel=1e-13)


@pytest.mark.parametrize("m,eta", [(1, 12.0), (2, 12.0), (3, 40.0), (5, 200.0)])
def test_reduced_model_reproduces_g(m, eta):
    p = WeightParams(1e-3, 0.5)
    s = ToyState(0.0, 1.0, m, eta, kappa=1.0, nu=1e-3)
    r = ResonanceIndex(m, eta)
    tr = integrate_toy_pair(s, r.interval, "reduced", n_steps=4000)
    g = growth_factor_g(m, eta, tr.t - eta / m, p)
    assert np.max(np.abs(tr.f_mpm1.real / g - 1.0)) < 1e-8


def test_span_outside_interval_rejected():
    s = ToyState(0.0, 1.0, 2, 12.0, kappa=1.0, nu=1e-3)
    with pytest.raises(ValueError):
        integrate_toy_pair(s, (0.0, 100.0))
    with pytest.raises(ValueError):
        integrate_toy_pair(s, ResonanceIndex(2, 12.0).interval, model="bogus")


def test_invalid_state_rejected():
    with pytest.raises(ValueError):
        ToyState(0.0, 1.0, 0, 12.0, 1.0, 1e-3)
    with pytest.raises(ValueError):
        ToyState(complex(math.nan), 1.0, 1, 12.0, 1.0, 1e-3)


def test_pair_growth_positive_and_reported():
    out = toy_divergence(ToyState(1.0, 1.0, 2, 12.0, kappa=1.0, nu=1e-3))
    assert out["pair_growth"] > 0 and out["reduced_growth"] > 1.0
    assert math.isfinite(out["log_ratio"])


def test_regime_boundaries():
    assert regime(1e-3, 5.0) == "low"
    eta = 1e4
    assert regime(1e-3, eta) == ("middle" if 10.0 * eta / 100 <= capital_E(eta) else "high")
    assert regime(1e-2, 1e6) == "high"


@given(st.floats(3.0, 1e4), st.sampled_from([1e-4, 1e-3, 1e-2]))
def test_log_total_is_sum_of_log_G(eta, nu):
    p = WeightParams(nu, 0.5)
    ref = sum(log_G(m, eta, p) for m in range(1, capital_E(eta) + 1))
    assert log_total_growth(eta, nu, 0.5) == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_scan_table_and_beta_zero_divergence():
    etas = np.logspace(0.5, 5, 60)
    tab = total_growth_scan([(1e-3, 0.5), (1e-3, 0.0)], etas)
    assert tab.eta.size == 120
    half = tab.log_total[:60]
    zero = tab.log_total[60:]
    assert np.all(zero >= half)
    # without beta the middle regime keeps growing; with it the product stays bounded
    assert zero[-1] > 2 * half[-1]
    consts = total_growth_scan(WeightParams(1e-3, 0.5), etas).regime_constants()
    assert set(consts) == {"low", "middle", "high"}
    assert len(list(tab.rows())) == 120
    with pytest.raises(ValueError):
        total_growth_scan(WeightParams(1e-3, 0.5), [1.0])
