import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from couette_lab import kernels
from couette_lab.errors import NoResonantWindow
from couette_lab.multipliers import (
    A_E, A_sigma, D_mult, ResonanceIndex, WeightParams, WeightTable, capital_E, dtw_over_w, growth_factor_g,
    in_window, log_G, japanese, resonant_window, rho_profile, total_growth, varrho, weight_w,
)

P = WeightParams(1e-3, 0.5)


def test_params_validation():
    for bad in ({"nu": 0}, {"nu": 2}, {"nu": 1e-3, "beta": 0.0}, {"nu": 1e-3, "beta": 0.6},
                {"nu": 1e-3, "s": 13}):
        with pytest.raises(ValueError):
            WeightParams(**bad)


def test_capital_E_and_window():
    assert capital_E(3) == 1 and capital_E(12) == 2 and capital_E(100) == 6
    with pytest.raises(NoResonantWindow):
        capital_E(2.9)
    assert resonant_window(12) == pytest.approx((4.8, 24.0))


@given(st.floats(3, 1e6))
def test_capital_E_definition(a):
    E = capital_E(a)
    assert (2 * E + 1) * E <= a < (2 * E + 3) * (E + 1)


def test_resonance_index():
    r = ResonanceIndex(2, 12.0)
    assert r.t_m == pytest.approx(4.8) and r.center == pytest.approx(6.0)
    assert r.interval == pytest.approx((4.8, 8.0))
    assert r.D_minus == pytest.approx(1.2) and r.D_plus == pytest.approx(2.0)


def test_growth_factor_known_values():
    assert math.exp(log_G(2, 12.0, P)) == pytest.approx(1.664088, abs=1e-6)
    assert growth_factor_g(3, 12.0, 0.0, P) == 1.0  # m > E


def test_weight_known_value():
    assert float(weight_w(30.0, 12.0, P)) == pytest.approx(17.0975, rel=1e-5)
    assert float(weight_w(1.0, 12.0, P)) == 1.0


@given(st.floats(-1e4, 1e4), st.floats(0, 3e4), st.floats(0, 100))
def test_weight_monotone_even_ge1(eta, t, dt):
    w1 = float(weight_w(t, eta, P))
    assert w1 >= 1.0
    assert float(weight_w(t + dt, eta, P)) >= w1 * (1 - 1e-13)
    assert float(weight_w(t, -eta, P)) == w1


@given(st.floats(3, 1e4))
def test_weight_continuous_at_endpoints(eta):
    E = capital_E(eta)
    for m in range(1, E + 1):
        tm = 2 * eta / (2 * m + 1)
        a, b = weight_w(tm * (1 - 1e-12), eta, P), weight_w(tm * (1 + 1e-12), eta, P)
        assert float(a) == pytest.approx(float(b), rel=1e-8)


def test_weight_saturates_at_total_growth():
    assert float(weight_w(48.0, 12.0, P)) == pytest.approx(total_growth(12.0, P), rel=1e-14)


def test_dtw_over_w_matches_finite_difference():
    t, h = 7.3, 1e-6
    fd = (math.log(float(weight_w(t + h, 12.0, P))) - math.log(float(weight_w(t - h, 12.0, P)))) / (2 * h)
    assert float(dtw_over_w(t, 12.0, P)) == pytest.approx(fd, rel=1e-6)


def test_in_window():
    assert bool(in_window(6.0, 12.0)) and not bool(in_window(30.0, 12.0)) and not bool(in_window(1.0, 2.0))


@given(st.floats(0, 1))
def test_rho_profile_range(x):
    r = float(rho_profile(x))
    assert 0.0 <= r <= 1.52


def test_varrho_branches():
    assert varrho(2, 5) == 5
    assert varrho(-3, 7) == -7
    assert varrho(0, -4.0) == -4.0
    assert varrho(20, 0.0) == pytest.approx(1.0)


@given(st.integers(-200, 200), st.floats(-500, 500))
def test_varrho_sign_and_odd(k, eta):
    if k != 0:
        assert np.sign(varrho(k, eta)) == np.sign(k)
        assert varrho(-k, -eta) == pytest.approx(-varrho(k, eta))


def test_D_lower_bound_examples():
    for t in (1.0, 10.0, 100.0):
        for eta in (-50.0, 0.0, 3.0, 200.0):
            assert D_mult(t, eta, P) >= P.nu * max(abs(eta) ** 3, t**3) / 24 * (1 - 1e-14)


def test_A_sigma_and_A_E():
    a = A_sigma(1, 12.0, 30.0, P)
    assert a == pytest.approx(japanese(1, 12.0) ** 12 / float(weight_w(30.0, 12.0, P)))
    with pytest.raises(ValueError):
        A_E(0, 1.0, 1.0, P)


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_kernel_backends_agree(backend):
    rng = np.random.default_rng(0)
    eta = rng.uniform(-1e4, 1e4, 20000)
    t = rng.uniform(0, 3e4, 20000)
    ref = kernels.log_weight(t, eta, 1e-4, 0.5, backend="python")
    got = kernels.log_weight(t, eta, 1e-4, 0.5, backend=backend)
    assert np.allclose(got[0], ref[0], rtol=1e-13, atol=1e-15)
    assert np.allclose(got[1], ref[1], rtol=1e-13, atol=1e-15)


def test_backend_selection():
    assert "python" in kernels.available_backends()
    before = kernels.backend()
    kernels.use_backend("python")
    assert kernels.backend() == "python"
    kernels.use_backend(before)
    with pytest.raises(ValueError):
        kernels.use_backend("gpu")


def test_weight_table_matches_kernel():
    eta = np.linspace(-200, 200, 801)
    tab = WeightTable(eta, P)
    for t in (0.5, 7.0, 33.0, 400.0):
        ref = kernels.log_weight(np.full_like(eta, t), eta, P.nu, P.beta)
        lw, rate = tab.log_weight_and_rate(t)
        assert np.allclose(lw, ref[0], atol=1e-14) and np.allclose(rate, ref[1], atol=1e-14)
