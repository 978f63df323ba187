import numpy as np
import pytest

from couette_lab import Grid, SimConfig, SpectralField, simulate
from couette_lab.coords import (
    CoordinateTracker, aux_fields, apply_delta_t, build_coordinates, coordinate_residuals, definitional_residuals,
    evolve_shift, identity_coordinates, invert_v, mean_velocity_coeffs, prescribed_coordinates,
    remap_from_moving_frame, remap_to_moving_frame, solve_delta_t,
)
from couette_lab.errors import ContractionError, CoordinateDegeneracy
from couette_lab.initial import make_initial
from couette_lab.spectral import apply_delta_L, profile_coeffs, profile_values


@pytest.fixture
def g():
    return Grid(8, 128, Lv=8 * np.pi)


def _h(g, amp):
    return amp * np.sin(2 * g.deta * g.v)


def test_identity_coordinates_reduce_to_delta_L(g):
    f = make_initial(g, "random_band", 1.0, 0.0, seed=1)
    co = identity_coordinates(g, 3.0)
    assert np.allclose(apply_delta_t(f, co).coeffs, apply_delta_L(f, 3.0).coeffs, atol=1e-13)


@pytest.mark.parametrize("t", [1.0, 10.0, 60.0])
def test_manufactured_elliptic(g, t):
    phi = make_initial(g, "random_band", 1.0, 0.0, seed=4)
    co = prescribed_coordinates(g, t, _h(g, 0.01))
    res = solve_delta_t(apply_delta_t(phi, co), co, tol=1e-13)
    assert np.max(np.abs(res.phi.coeffs - phi.coeffs)) <= 1e-9 * np.max(np.abs(phi.coeffs))
    assert res.contraction < 0.1


def test_elliptic_contraction_guard(g):
    f = make_initial(g, "random_band", 1.0, 0.0, seed=4)
    co = prescribed_coordinates(g, 5.0, _h(g, 0.45))
    with pytest.raises(ContractionError):
        solve_delta_t(f, co, guard=0.05)


def test_degenerate_coordinates_rejected(g):
    with pytest.raises(CoordinateDegeneracy):
        prescribed_coordinates(g, 1.0, _h(g, 0.6))
    phi_hat = profile_coeffs(g, 2.0 * np.sin(2 * g.deta * g.v) / (2 * g.deta))
    with pytest.raises(CoordinateDegeneracy):
        build_coordinates(1.0, phi_hat, SpectralField.zeros(g))


def test_invert_v_and_remap_roundtrip(g):
    t = 2.0
    phi_hat = profile_coeffs(g, 0.05 * t * np.sin(g.deta * g.v))
    yv = invert_v(g, phi_hat, t)
    Phi = profile_values(g, phi_hat)
    from couette_lab.spectral import profile_eval
    assert np.allclose(yv + profile_eval(g, Phi, yv) / t, g.v, atol=1e-12)
    f = make_initial(g, "random_band", 1.0, 0.0, seed=2)
    co = build_coordinates(t, phi_hat, f)
    back = remap_from_moving_frame(remap_to_moving_frame(f, co), co)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-7 * np.max(np.abs(f.coeffs)))


def test_mean_velocity_is_minus_dy_psi0(g):
    f = make_initial(g, "random_band", 1.0, 0.0, seed=2)
    u = mean_velocity_coeffs(f)
    # d_y <U^x> = -omega_0 away from eta = 0
    c0 = f.coeffs[0, :] / np.sqrt(2 * np.pi)
    nz = (g.eta != 0) & (np.arange(g.Nv) != g.Nv // 2)
    assert np.allclose((1j * g.eta * u)[nz], -c0[nz])


def test_tracker_matches_evolve_shift(g):
    f = make_initial(g, "random_band", 1.0, 0.0, seed=2)
    tr = CoordinateTracker(g, 1e-2, f)
    times = np.linspace(0, 2, 11)
    ux = [profile_values(g, mean_velocity_coeffs(f))] * times.size
    for t in times[1:]:
        tr.advance(t, f)
    Phi, _ = evolve_shift(times, ux, g, 1e-2)
    assert np.allclose(profile_values(g, tr.phi_hat), Phi[-1], atol=1e-13)
    with pytest.raises(ValueError):
        evolve_shift([1.0, 2.0], ux[:2], g, 1e-2)


def test_aux_fields_need_t_ge_1(g):
    with pytest.raises(ValueError):
        aux_fields(identity_coordinates(g, 0.5))


def _three_states(dt):
    g = Grid(16, 128, Lv=8 * np.pi)
    cfg = SimConfig(g, 1e-2, 0.3, beta_amp=0.0, sigma=2.0, initial_preset="gaussian_bump", t_end=3.0 + dt,
                    dt=dt, record_every=1)
    keep = []

    def on_record(st, tracker):
        if st.t >= 3.0 - dt - 1e-9:
            keep.append((tracker.state(st.omega_sheared_hat), st.omega_sheared_hat))

    simulate(cfg, on_record)
    return keep[-3:]


def test_coordinate_equations_second_order():
    errs = []
    for dt in (0.02, 0.01):
        (p, _), (m, fm), (n, _) = _three_states(dt)
        r = coordinate_residuals(p, m, n, remap_to_moving_frame(fm, m), 1e-2)
        d = definitional_residuals(p, m, n, 1e-2)
        assert d["vprime_dC"] < 1e-10
        errs.append(np.array([r["g"], r["hbar"], r["h"], d["dt_v"]]))
    assert np.all(errs[0] < 1e-3)
    assert np.all(errs[0] / errs[1] > 3.0)
