"""Nonlinear change of coordinates ``(t, x, y) -> (t, z, v)`` and the elliptic problem.

``Phi(t, y) = int_0^t e^{nu (t - s) d_yy} <U^x>(s, y) ds`` and ``v = y + Phi / t``.
A sheared-frame field ``f_s(t, z, y) = omega(t, z + t y, y)`` becomes
``f(t, z, v(t, y)) = f_s(t, z + Phi(t, y), y)`` in the moving coordinates.
Profiles of ``v`` live on the same periodic grid as ``y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractionError, CoordinateDegeneracy, NonFiniteError
from .spectral import (
    Grid,
    SpectralField,
    _interp_weights,
    coeffs_from_values,
    field_from_rows,
    profile_coeffs,
    profile_values,
    rows_at,
    shear_symbol,
    values_from_coeffs,
)

DEGENERACY_BOUND = 0.5


def zero_mode(f: SpectralField) -> np.ndarray:
    """1D unitary coefficients of the z-average of f."""
    return f.coeffs[0, :] / math.sqrt(2 * math.pi)


def mean_velocity_coeffs(f: SpectralField) -> np.ndarray:
    """Coefficients of <U^x>(y) = -d_y psi_0 from the zero mode of the vorticity."""
    g = f.grid
    c0 = zero_mode(f)
    eta = g.eta
    safe = np.where(eta == 0, 1.0, eta)
    out = np.where(eta == 0, 0.0, 1j * c0 / safe)
    out[g.Nv // 2] = 0.0
    return out


def _eval(grid: Grid, coeffs: np.ndarray, y: np.ndarray, order: int = 0) -> np.ndarray:
    c = coeffs * (1j * grid.eta) ** order
    if order % 2 == 1:
        c = c.copy()
        c[grid.Nv // 2] = 0.0
    return (_interp_weights(grid, y) @ c).real / math.sqrt(grid.Lv)


def _deriv_values(grid: Grid, coeffs: np.ndarray, order: int) -> np.ndarray:
    c = coeffs * (1j * grid.eta) ** order
    if order % 2 == 1:
        c[grid.Nv // 2] = 0.0
    return profile_values(grid, c)


class CoordinateTracker:
    """Accumulates Phi_hat along a run with the exact heat factor and trapezoidal source."""

    def __init__(self, grid: Grid, nu: float, f0: SpectralField, t0: float = 0.0):
        self.grid = grid
        self.nu = nu
        self.t = t0
        self.phi_hat = np.zeros(grid.Nv, dtype=complex)
        self._src = mean_velocity_coeffs(f0)

    def advance(self, t_new: float, f_new: SpectralField) -> None:
        h = t_new - self.t
        decay = np.exp(-self.nu * self.grid.eta**2 * h)
        src = mean_velocity_coeffs(f_new)
        self.phi_hat = decay * self.phi_hat + 0.5 * h * (decay * self._src + src)
        self._src = src
        self.t = t_new

    def state(self, f_sheared: SpectralField) -> "CoordinateState":
        return build_coordinates(self.t, self.phi_hat, f_sheared)


def evolve_shift(times, ux_trace, grid: Grid, nu: float):
    """Phi and v at each sample time from sampled mean velocities.

    ``ux_trace[i]`` holds <U^x>(times[i], y) on ``grid.v``; ``times[0]`` must be 0.
    Returns (Phi, v) arrays of shape (len(times), Nv); v[0] is taken as y + <U^x>(0).
    """
    times = np.asarray(times, dtype=float)
    ux = np.asarray(ux_trace, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must start at 0 and increase strictly")
    phi_hat = np.zeros(grid.Nv, complex)
    src = profile_coeffs(grid, ux[0])
    Phi = np.zeros((times.size, grid.Nv))
    for i in range(1, times.size):
        h = times[i] - times[i - 1]
        decay = np.exp(-nu * grid.eta**2 * h)
        new = profile_coeffs(grid, ux[i])
        phi_hat = decay * phi_hat + 0.5 * h * (decay * src + new)
        src = new
        Phi[i] = profile_values(grid, phi_hat)
    y = grid.v[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(times[:, None] > 0, y + Phi / np.where(times[:, None] > 0, times[:, None], 1.0), y + ux[0])
    vp = 1.0 + np.array([np.gradient(Phi[i], grid.v) for i in range(times.size)]) / np.maximum(times[:, None], 1e-300)
    if np.any(vp[1:] <= 0):
        raise CoordinateDegeneracy("y -> v(t, y) is not monotone")
    return Phi, v


@dataclass(frozen=True, eq=False)
class CoordinateState:
    """Coordinate profiles at time t.

    ``v_of_y`` and ``Phi_of_y`` are sampled at y = grid.v; every other profile is a
    function of the new variable sampled at v = grid.v.
    """

    grid: Grid
    t: float
    phi_hat: np.ndarray
    v_of_y: np.ndarray
    Phi_of_y: np.ndarray
    y_of_v: np.ndarray
    vprime: np.ndarray
    vsecond: np.ndarray
    C_of_v: np.ndarray
    u0_tilde: np.ndarray
    f0: np.ndarray
    Phi_at_y_of_v: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.vprime - 1.0

    @property
    def g(self) -> np.ndarray:
        return (self.u0_tilde - self.C_of_v) / self.t

    @property
    def hbar(self) -> np.ndarray:
        return (-self.f0 - self.h) / self.t


def identity_coordinates(grid: Grid, t: float, f_sheared: SpectralField | None = None) -> CoordinateState:
    y = grid.v.copy()
    zero = np.zeros(grid.Nv)
    f0 = zero if f_sheared is None else profile_values(grid, zero_mode(f_sheared))
    u0 = zero if f_sheared is None else profile_values(grid, mean_velocity_coeffs(f_sheared))
    return CoordinateState(grid, t, np.zeros(grid.Nv, complex), y, zero, y, np.ones(grid.Nv), zero,
                           zero, u0, f0, zero)


def prescribed_coordinates(grid: Grid, t: float, h: np.ndarray) -> CoordinateState:
    """Coordinates with a given h = v' - 1 (as a function of v) and v'' = v' d_v v'.

    Only the fields the elliptic operator reads are meaningful; the shift is zero.
    """
    vp = 1.0 + np.asarray(h, dtype=float)
    if np.min(vp) <= DEGENERACY_BOUND:
        raise CoordinateDegeneracy(f"min v' = {np.min(vp):.3g} <= {DEGENERACY_BOUND}")
    vpp = vp * _deriv_values(grid, profile_coeffs(grid, vp), 1)
    y = grid.v.copy()
    zero = np.zeros(grid.Nv)
    return CoordinateState(grid, t, np.zeros(grid.Nv, complex), y, zero, y, vp, vpp, zero, zero, zero, zero)


def invert_v(grid: Grid, phi_hat: np.ndarray, t: float, tol: float = 1e-14, max_iter: int = 50) -> np.ndarray:
    """Solve y + Phi(y)/t = V for y at every V in grid.v (Newton)."""
    V = grid.v
    y = V - _eval(grid, phi_hat, V) / t
    for _ in range(max_iter):
        E = _interp_weights(grid, y)
        L = math.sqrt(grid.Lv)
        res = y + (E @ phi_hat).real / L / t - V
        d = phi_hat * 1j * grid.eta
        d[grid.Nv // 2] = 0.0
        jac = 1.0 + (E @ d).real / L / t
        if np.any(jac <= 0):
            raise CoordinateDegeneracy("v'(y) <= 0 during inversion")
        step = res / jac
        y = y - step
        if np.max(np.abs(step)) <= tol * max(1.0, grid.Lv):
            break
    return y


def build_coordinates(t: float, phi_hat: np.ndarray, f_sheared: SpectralField) -> CoordinateState:
    """All coordinate profiles at time t > 0 from Phi_hat and the sheared vorticity."""
    if not t > 0:
        raise ValueError("coordinates need t > 0")
    grid = f_sheared.grid
    phi_hat = np.asarray(phi_hat, dtype=complex)
    if not np.all(np.isfinite(phi_hat)):
        raise NonFiniteError("non-finite shift profile")
    y = grid.v
    Phi = profile_values(grid, phi_hat)
    Phi_y = _deriv_values(grid, phi_hat, 1)
    vp_y = 1.0 + Phi_y / t
    if np.min(vp_y) <= DEGENERACY_BOUND:
        raise CoordinateDegeneracy(f"min v' = {np.min(vp_y):.3g} <= {DEGENERACY_BOUND}")
    yv = invert_v(grid, phi_hat, t)
    vprime = 1.0 + _eval(grid, phi_hat, yv, 1) / t
    vsecond = _eval(grid, phi_hat, yv, 2) / t
    u0 = _eval(grid, mean_velocity_coeffs(f_sheared), yv)
    f0 = _eval(grid, zero_mode(f_sheared), yv)
    return CoordinateState(
        grid=grid, t=t, phi_hat=phi_hat.copy(), v_of_y=y + Phi / t, Phi_of_y=Phi, y_of_v=yv,
        vprime=vprime, vsecond=vsecond, C_of_v=grid.v - yv, u0_tilde=u0, f0=f0,
        Phi_at_y_of_v=_eval(grid, phi_hat, yv),
    )


def aux_fields(coords: CoordinateState) -> dict[str, np.ndarray]:
    """g, h, hbar, v', v'' as functions of v (defined for t >= 1)."""
    if coords.t < 1:
        raise ValueError("auxiliary fields are defined for t >= 1")
    return {"g": coords.g, "h": coords.h, "hbar": coords.hbar, "vprime": coords.vprime,
            "vsecond": coords.vsecond}


def dt_v(coords: CoordinateState, nu: float) -> np.ndarray:
    """[d_t v](t, v) = g + nu v''."""
    return coords.g + nu * coords.vsecond


# -- remapping ------------------------------------------------------------------

def _shift_rows(grid: Grid, rows: np.ndarray, shift: np.ndarray) -> np.ndarray:
    k = grid.k.astype(float)[:, None]
    out = rows * np.exp(1j * k * shift[None, :])
    out[grid.Kmax, :] = out[grid.Kmax, :].real  # Nyquist row as its cosine part
    return out


def remap_to_moving_frame(f_sheared: SpectralField, coords: CoordinateState) -> SpectralField:
    """f(t, z, v) = f_s(t, z + Phi(y(v)), y(v))."""
    grid = f_sheared.grid
    rows = rows_at(f_sheared, coords.y_of_v)
    return field_from_rows(grid, _shift_rows(grid, rows, coords.Phi_at_y_of_v), f_sheared.time_tag)


def remap_from_moving_frame(f: SpectralField, coords: CoordinateState) -> SpectralField:
    """Inverse of :func:`remap_to_moving_frame`: f_s(t, z, y) = f(t, z - Phi(y), v(y))."""
    grid = f.grid
    rows = rows_at(f, coords.v_of_y)
    return field_from_rows(grid, _shift_rows(grid, rows, -coords.Phi_of_y), f.time_tag)


# -- elliptic problem -------------------------------------------------------------

def _mul_profile(grid: Grid, profile: np.ndarray, c: np.ndarray) -> np.ndarray:
    vals = values_from_coeffs(grid, c, check_real=False)
    return _drop_nyquist(grid, coeffs_from_values(grid, vals * profile[None, :]))


def _drop_nyquist(grid: Grid, c: np.ndarray) -> np.ndarray:
    """Zero the v-Nyquist column: under eta -> eta - k t it has no real-symmetric counterpart."""
    c = np.array(c)
    c[:, grid.Nv // 2] = 0.0
    return c


def apply_delta_t(phi: SpectralField, coords: CoordinateState) -> SpectralField:
    """d_zz phi + (v')^2 (d_v - t d_z)^2 phi + v'' (d_v - t d_z) phi, v-Nyquist column removed."""
    g = phi.grid
    t = coords.t
    dy = 1j * (g.ETA - g.K * t)
    c = _drop_nyquist(g, phi.coeffs)
    out = -(g.K**2) * c + _mul_profile(g, coords.vprime**2, dy * dy * c) + _mul_profile(g, coords.vsecond, dy * c)
    return phi.with_coeffs(out)


@dataclass
class EllipticResult:
    phi: SpectralField
    iterations: int
    residual: float
    contraction: float


def solve_delta_t(f: SpectralField, coords: CoordinateState, tol: float = 1e-10,
                  max_iter: int = 200, guard: float = 0.9) -> EllipticResult:
    """Picard iteration Delta_L phi^{n+1} = f + (1 - v'^2) D^2 phi^n - v'' D phi^n, D = d_v - t d_z.

    The v-Nyquist column of ``f`` is dropped (see :func:`apply_delta_t`). Stops once
    ||Delta_t phi - f|| <= tol ||f|| with the (0, 0) mode excluded. Raises
    :class:`ContractionError` when the measured contraction factor of the last five updates
    exceeds ``guard``.
    """
    g = f.grid
    t = coords.t
    sym = shear_symbol(g, t)
    sym[0, 0] = 1.0
    dy = 1j * (g.ETA - g.K * t)
    a = 1.0 - coords.vprime**2
    b = coords.vsecond
    fc = _drop_nyquist(g, f.coeffs)
    fnorm = float(np.sqrt(np.sum(np.abs(fc) ** 2)))
    if fnorm == 0.0:
        return EllipticResult(f.with_coeffs(np.zeros_like(fc)), 0, 0.0, 0.0)

    def lap_inv(c):
        out = -c / sym
        out[0, 0] = 0.0
        return out

    phi = lap_inv(fc)
    deltas = []
    factor = 0.0
    residual = float("inf")
    for it in range(1, max_iter + 1):
        d1 = dy * phi
        rhs = fc + _mul_profile(g, a, dy * d1) - _mul_profile(g, b, d1)
        new = lap_inv(rhs)
        deltas.append(float(np.sqrt(np.sum(np.abs(new - phi) ** 2))))
        phi = new
        res = apply_delta_t(f.with_coeffs(phi), coords).coeffs - fc
        # the constant mode is a compatibility condition, not solvable with zero-mean phi
        res[0, 0] = 0.0
        residual = float(np.sqrt(np.sum(np.abs(res) ** 2))) / fnorm
        if len(deltas) >= 2 and deltas[-2] > 0:
            window = [deltas[i] / deltas[i - 1] for i in range(max(1, len(deltas) - 5), len(deltas)) if deltas[i - 1] > 0]
            factor = max(window) if window else 0.0
        if residual <= tol:
            return EllipticResult(f.with_coeffs(phi), it, residual, factor)
        if len(deltas) >= 6 and factor > guard:
            raise ContractionError(factor)
    raise ContractionError(factor)


# -- residuals of the coordinate evolution ------------------------------------------

def _dv(grid: Grid, p: np.ndarray, order: int = 1) -> np.ndarray:
    return _deriv_values(grid, profile_coeffs(grid, p), order)


def _zavg(grid: Grid, values: np.ndarray) -> np.ndarray:
    return values.mean(axis=0)


def coordinate_residuals(prev: CoordinateState, mid: CoordinateState, nxt: CoordinateState,
                         f_mid: SpectralField, nu: float) -> dict[str, float]:
    """Relative residuals of the g, hbar and h evolution equations at the middle time.

    ``f_mid`` is the moving-frame vorticity at ``mid.t``; time derivatives are
    centered differences of the definitional profiles.
    """
    grid = mid.grid
    t = mid.t
    dt = nxt.t - prev.t
    phi = solve_delta_t(f_mid, mid).phi
    gv = grid
    dy = 1j * (gv.ETA - gv.K * t)
    utilde = -mid.vprime[None, :] * values_from_coeffs(gv, dy * phi.coeffs, check_real=False)
    pc = np.array(phi.coeffs)
    pc[0, :] = 0.0
    phi_z, phi_v = values_from_coeffs(gv, np.stack([1j * gv.K * pc, 1j * gv.ETA * pc]), check_real=False)
    uc = coeffs_from_values(gv, utilde)
    u_z, u_v = values_from_coeffs(gv, np.stack([1j * gv.K * uc, 1j * gv.ETA * uc]), check_real=False)
    fz, fv = values_from_coeffs(gv, np.stack([1j * gv.K * f_mid.coeffs, 1j * gv.ETA * f_mid.coeffs]),
                                check_real=False)
    # grad^perp P phi . grad F = -phi_v F_z + phi_z F_v
    flux_u = _zavg(gv, -phi_v * u_z + phi_z * u_v)
    flux_f = _zavg(gv, -phi_v * fz + phi_z * fv)
    vp2 = mid.vprime**2
    g, hb, h = mid.g, mid.hbar, mid.h

    def rel(terms):
        res = sum(terms)
        scale = max(max(np.max(np.abs(x)) for x in terms), 1e-300)
        return float(np.max(np.abs(res)) / scale)

    dtg = (nxt.g - prev.g) / dt
    dth = (nxt.h - prev.h) / dt
    dthb = (nxt.hbar - prev.hbar) / dt
    return {
        "g": rel([dtg, 2 * g / t, g * _dv(grid, g), mid.vprime / t * flux_u, -nu * vp2 * _dv(grid, g, 2)]),
        "hbar": rel([dthb, 2 * hb / t, g * _dv(grid, hb), -mid.vprime / t * flux_f, -nu * vp2 * _dv(grid, hb, 2)]),
        "h": rel([dth, g * _dv(grid, h), -hb, -nu * vp2 * _dv(grid, h, 2)]),
    }


def definitional_residuals(prev: CoordinateState, mid: CoordinateState, nxt: CoordinateState,
                           nu: float) -> dict[str, float]:
    """v' d_v C = v' - 1 and [d_t v] = g + nu v'' (the latter by centered differences in t)."""
    grid = mid.grid
    # C(v) = v - y(v) is periodic, so differentiate it spectrally
    dC = _dv(grid, mid.C_of_v)
    ident = float(np.max(np.abs(mid.vprime * dC - mid.h)))
    # [d_t v](t, v) is d_t v(t, y) evaluated at y = y(v)
    dt = nxt.t - prev.t
    vt_y = (nxt.Phi_of_y / nxt.t - prev.Phi_of_y / prev.t) / dt
    vt = _eval(grid, profile_coeffs(grid, vt_y), mid.y_of_v)
    target = dt_v(mid, nu)
    scale = max(float(np.max(np.abs(target))), 1e-300)
    return {"vprime_dC": ident, "dt_v": float(np.max(np.abs(vt - target)) / scale)}
