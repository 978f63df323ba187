import numpy as np
import pytest

from couette_lab import Grid, LinearSolution, SimConfig, evolve_linear, simulate
from couette_lab.errors import BlowUpError
from couette_lab.initial import PRESETS, make_initial
from couette_lab.solver import SimState, biot_savart, cfl_number, nonlinear_term, step
from couette_lab.spectral import (
    coeffs_from_values, dealias, l2_norm, sobolev_norm, values_from_coeffs,
)


def _complex_rhs(f, t):
    # reference transport term with full complex transforms
    g = f.grid
    psi, _, _ = biot_savart(f, t)
    val = lambda c: values_from_coeffs(g, c, check_real=False)  # noqa: E731
    pz, pv = val(1j * g.K * psi.coeffs), val(1j * g.ETA * psi.coeffs)
    fz, fv = val(1j * g.K * f.coeffs), val(1j * g.ETA * f.coeffs)
    c = coeffs_from_values(g, pv * fz - pz * fv)
    c = np.where(g.dealias_mask, c, 0.0)
    c[0, 0] = 0.0
    return c


def test_config_validation():
    g = Grid(4, 16)
    for bad in ({"nu": 0.0}, {"amplitude": -1.0}, {"initial_preset": "x"}, {"t_end": 0.0}, {"dt": "fast"},
                {"dt": -0.1}, {"record_every": 0}, {"ceiling": 1.0}):
        kw = {"grid": g, "nu": 1e-2, "amplitude": 0.1, **bad}
        with pytest.raises(ValueError):
            SimConfig(**kw)


@pytest.mark.parametrize("preset", PRESETS)
def test_initial_data_normalized(preset):
    g = Grid(8, 32)
    f = make_initial(g, preset, 0.3, 4.0, seed=2)
    assert sobolev_norm(f, 4.0) == pytest.approx(0.3)
    assert f.coeffs[0, 0] == 0
    assert np.all(f.coeffs[~g.dealias_mask] == 0)
    assert l2_norm(make_initial(g, preset, 0.0, 4.0)) == 0.0


def test_initial_deterministic():
    g = Grid(8, 32)
    a = make_initial(g, "random_band", 1.0, 2.0, seed=5)
    b = make_initial(g, "random_band", 1.0, 2.0, seed=5)
    assert np.array_equal(a.coeffs, b.coeffs)


def test_rhs_matches_complex_reference():
    g = Grid(8, 32)
    f = make_initial(g, "random_band", 1.0, 0.0, seed=1)
    assert np.allclose(nonlinear_term(f, 1.7).coeffs, _complex_rhs(f, 1.7), atol=1e-14)


def test_biot_savart_divergence_free():
    g = Grid(8, 32)
    f = make_initial(g, "random_band", 1.0, 0.0, seed=1)
    _, ux, uy = biot_savart(f, 2.0)
    div = 1j * g.K * ux.coeffs + 1j * (g.ETA - g.K * 2.0) * uy.coeffs
    assert np.max(np.abs(div)) < 1e-14


def test_linear_limit_matches_exact():
    g = Grid(8, 32)
    f0 = make_initial(g, "random_band", 1.0, 0.0, seed=1)
    st = SimState(0.0, f0)
    for _ in range(20):
        st = step(st, 0.1, 1e-2, nonlinear=False)
    exact, _ = evolve_linear(LinearSolution(f0, 1e-2), st.t)
    assert np.allclose(st.omega_sheared_hat.coeffs, exact.coeffs, rtol=1e-12, atol=1e-15)


def test_enstrophy_conserved_inviscid():
    g = Grid(8, 32)
    f0 = make_initial(g, "random_band", 0.5, 0.0, seed=1)
    st = SimState(0.0, f0)
    for _ in range(20):
        st = step(st, 0.02, 0.0)
    assert l2_norm(st.omega_sheared_hat) == pytest.approx(l2_norm(f0), rel=1e-8)


def test_self_convergence_order():
    g = Grid(8, 32)
    f0 = make_initial(g, "random_band", 2.0, 0.0, seed=1)

    def run(n):
        st = SimState(0.0, f0)
        for _ in range(n):
            st = step(st, 1.0 / n, 1e-2)
        return st.omega_sheared_hat.coeffs

    a, b, c = run(8), run(16), run(32)
    factor = np.linalg.norm(a - b) / np.linalg.norm(b - c)
    assert factor == pytest.approx(16, abs=3)


def test_blow_up_detected():
    g = Grid(4, 16)
    c = np.zeros(g.shape, complex)
    c[1, 1] = np.inf
    from couette_lab import SpectralField
    with pytest.raises(BlowUpError):
        step(SimState(0.0, SpectralField(g, c)), 0.1, 1e-2)


def test_cfl_rejection():
    g = Grid(8, 32)
    cfg = SimConfig(g, 1e-2, 1e6, beta_amp=0.0, sigma=2.0, dt=1.0, t_end=1.0)
    with pytest.raises(ValueError, match="CFL"):
        simulate(cfg)


def test_simulate_records_and_classifies():
    g = Grid(8, 32)
    cfg = SimConfig(g, 1e-2, 0.05, t_end=2.0, dt=0.1, record_every=5)
    tr = simulate(cfg)
    assert tr.classification == "stable"
    assert tr.t[0] == 0.0 and tr.t[-1] == pytest.approx(2.0)
    assert np.all(np.diff(tr.t) > 0)
    assert tr.summary["steps"] == 20


def test_simulate_adaptive():
    g = Grid(8, 32)
    cfg = SimConfig(g, 1e-2, 0.05, t_end=1.0, dt="adaptive", rtol=1e-9, track_coordinates=False)
    tr = simulate(cfg)
    assert tr.classification == "stable" and tr.t[-1] == pytest.approx(1.0)


def test_ceiling_marks_unstable():
    g = Grid(8, 32)
    cfg = SimConfig(g, 1e-2, 50.0, beta_amp=0.0, sigma=2.0, t_end=5.0, dt=0.01, ceiling=1.0001,
                    track_coordinates=False)
    tr = simulate(cfg)
    assert tr.classification == "unstable"
    assert tr.events[0]["kind"] == "ceiling"


def test_zero_amplitude_stays_zero():
    g = Grid(4, 16)
    tr = simulate(SimConfig(g, 1e-2, 0.0, t_end=1.0, dt=0.1))
    assert tr.classification == "stable"
    assert l2_norm(tr.final_state.omega_sheared_hat) == 0.0


def test_cfl_number_scales_with_dt():
    g = Grid(8, 32)
    f = make_initial(g, "random_band", 1.0, 0.0, seed=1)
    assert cfl_number(f, 0.0, 0.2) == pytest.approx(2 * cfl_number(f, 0.0, 0.1))
