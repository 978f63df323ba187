"""Nonlinear vorticity dynamics in the sheared frame.

The unknown is ``f(t, z, y) = omega(t, z + t y, y)``. Shear and viscosity are
diagonal in Fourier space, ``d_t f_hat = -nu (k^2 + (eta - k t)^2) f_hat + N``, and
the transport term reduces to the plain (z, y) Jacobian of the sheared
streamfunction ``phi = Delta_L^{-1} f``::

    N = -(phi_z f_y - phi_y f_z)

Time stepping is integrating-factor RK4 with the exact viscous factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from . import spectral
from .errors import BlowUpError, CoordinateDegeneracy
from .initial import PRESETS, make_initial
from .linear import decay_factor
from .multipliers import WeightParams
from .spectral import Grid, SpectralField, coeffs_from_values, shear_symbol, sobolev_norm, values_from_coeffs


@dataclass(frozen=True)
class SimConfig:
    """Run parameters. The initial H^sigma norm is ``amplitude * nu**beta_amp``."""

    grid: Grid
    nu: float
    amplitude: float
    beta_amp: float = 1.0 / 3.0
    initial_preset: str = "gaussian_bump"
    seed: int = 0
    t_end: float = 10.0
    dt: float | str = 0.05
    record_every: int = 10
    sigma: float = 12.0
    s: float = 2.0
    beta: float = 0.5
    ceiling: float = 4.0
    nonlinear: bool = True
    track_coordinates: bool = True
    rtol: float = 1e-8
    cfl_max: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.initial_preset not in PRESETS:
            raise ValueError(f"unknown preset {self.initial_preset!r}")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if isinstance(self.dt, str):
            if self.dt != "adaptive":
                raise ValueError("dt must be a positive number or 'adaptive'")
        elif not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if not self.ceiling > 1:
            raise ValueError("ceiling must exceed 1")

    @property
    def effective_amplitude(self) -> float:
        return self.amplitude * self.nu ** self.beta_amp

    @property
    def epsilon(self) -> float:
        """epsilon in ||omega_in||_{H^sigma} = epsilon nu^(1/3)."""
        return self.effective_amplitude / self.nu ** (1.0 / 3.0)

    @property
    def weight_params(self) -> WeightParams:
        return WeightParams(self.nu, self.beta, self.sigma, self.s)


@dataclass(frozen=True)
class SimState:
    t: float
    omega_sheared_hat: SpectralField


def initial_state(cfg: SimConfig) -> SimState:
    f0 = make_initial(cfg.grid, cfg.initial_preset, cfg.effective_amplitude, cfg.sigma, cfg.seed)
    return SimState(0.0, f0)


def _inv_laplacian(grid: Grid, t: float, c: np.ndarray) -> np.ndarray:
    sym = shear_symbol(grid, t)
    sym[0, 0] = 1.0
    out = -c / sym
    out[0, 0] = 0.0
    return out


def biot_savart(omega_hat: SpectralField, t: float):
    """(psi_hat, Ux_hat, Uy_hat) of a sheared-frame vorticity at time t.

    ``U = (-d_y psi, d_x psi)`` with ``d_x -> ik`` and ``d_y -> i(eta - k t)``.
    """
    g = omega_hat.grid
    psi = _inv_laplacian(g, t, omega_hat.coeffs)
    ux = -1j * (g.ETA - g.K * t) * psi
    uy = 1j * g.K * psi
    return tuple(omega_hat.with_coeffs(c, t) for c in (psi, ux, uy))


@lru_cache(maxsize=16)
def _plan(grid: Grid):
    """Constants for the real-to-complex transforms used by the transport term."""
    half = grid.Nv // 2 + 1
    scale = grid.norm * grid.phase[:half]
    negk = (-np.arange(grid.Nz)) % grid.Nz
    negj = grid.Nv - np.arange(half, grid.Nv)
    K = grid.K[:, :half]
    ETA = grid.ETA[:, :half]
    return half, scale, negk, negj, K, ETA, grid.dealias_mask


def _rhs(grid: Grid, t: float, c: np.ndarray) -> np.ndarray:
    half, scale, negk, negj, K, ETA, mask = _plan(grid)
    ch = c[:, :half]
    sym = K * K + (ETA - K * t) ** 2
    sym[0, 0] = 1.0
    phi = -ch / sym
    phi[0, 0] = 0.0
    buf = np.empty((4,) + ch.shape, dtype=complex)
    np.multiply(1j * K, phi, out=buf[0])
    np.multiply(1j * ETA, phi, out=buf[1])
    np.multiply(1j * K, ch, out=buf[2])
    np.multiply(1j * ETA, ch, out=buf[3])
    buf /= scale
    pz, pv, fz, fv = sfft.irfft2(buf, s=grid.shape, workers=spectral._WORKERS)
    r = sfft.rfft2(pv * fz - pz * fv, workers=spectral._WORKERS) * scale
    out = np.empty(grid.shape, dtype=complex)
    out[:, :half] = r
    out[:, half:] = np.conj(r[negk][:, negj])
    out[~mask] = 0.0
    out[0, 0] = 0.0
    return out


def nonlinear_term(f: SpectralField, t: float) -> SpectralField:
    """Dealiased transport term N(t, f) of the sheared-frame equation."""
    return f.with_coeffs(_rhs(f.grid, t, f.coeffs), t)


def _rk4(grid: Grid, nu: float, t: float, c: np.ndarray, h: float, nonlinear: bool) -> np.ndarray:
    E1 = decay_factor(grid, nu, t, t + h / 2)
    E2 = decay_factor(grid, nu, t + h / 2, t + h)
    E = E1 * E2
    if not nonlinear:
        return E * c
    th = t + h / 2
    k1 = _rhs(grid, t, c)
    k2 = _rhs(grid, th, E1 * (c + 0.5 * h * k1))
    k3 = _rhs(grid, th, E1 * c + 0.5 * h * k2)
    k4 = _rhs(grid, t + h, E * c + h * E2 * k3)
    return E * c + (h / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


def step(state: SimState, dt: float, nu: float, nonlinear: bool = True) -> SimState:
    """One integrating-factor RK4 step."""
    f = state.omega_sheared_hat
    with np.errstate(all="ignore"):
        c = _rk4(f.grid, nu, state.t, f.coeffs, dt, nonlinear)
    t1 = state.t + dt
    if not np.all(np.isfinite(c)):
        raise BlowUpError(t1)
    return SimState(t1, SpectralField(f.grid, c, t1))


def cfl_number(f: SpectralField, t: float, dt: float) -> float:
    """dt * (max|phi_y| Kmax + max|phi_z| eta_max): advective CFL of the transport term."""
    g = f.grid
    phi = _inv_laplacian(g, t, f.coeffs)
    pz, pv = values_from_coeffs(g, np.stack([1j * g.K * phi, 1j * g.ETA * phi]), check_real=False)
    return float(dt * (np.max(np.abs(pv)) * g.Kmax + np.max(np.abs(pz)) * g.eta_max))


class PIController:
    """Step-doubling error estimate with a proportional-integral step update."""

    def __init__(self, rtol: float, dt0: float, dt_min: float = 1e-6, dt_max: float = 1.0):
        self.rtol = rtol
        self.dt = dt0
        self.dt_min = dt_min
        self.dt_max = dt_max
        self._prev = 1.0

    def attempt(self, grid, nu, t, c, nonlinear):
        while True:
            h = self.dt
            full = _rk4(grid, nu, t, c, h, nonlinear)
            half = _rk4(grid, nu, t + h / 2, _rk4(grid, nu, t, c, h / 2, nonlinear), h / 2, nonlinear)
            scale = max(np.sqrt(np.sum(np.abs(half) ** 2)), 1e-300)
            err = np.sqrt(np.sum(np.abs(half - full) ** 2)) / 15.0 / (self.rtol * scale)
            if not np.isfinite(err):
                raise BlowUpError(t + h)
            err = max(err, 1e-10)
            fac = 0.9 * err ** (-0.7 / 5) * self._prev ** (0.4 / 5)
            fac = min(2.0, max(0.2, fac))
            if err <= 1.0 or h <= self.dt_min:
                self._prev = err
                self.dt = min(self.dt_max, max(self.dt_min, h * fac))
                return h, half
            self.dt = max(self.dt_min, h * min(fac, 0.9))


def simulate(cfg: SimConfig, on_record=None):
    """Run ``cfg`` and return an :class:`~couette_lab.diagnostics.EnergyTrace`.

    Diagnostics are sampled every ``record_every`` steps and at ``t_end``. The run is
    classified "unstable" on blow-up, coordinate degeneracy, or when
    ||f||_{H^sigma} exceeds ``ceiling`` times its initial value.
    """
    from .coords import CoordinateTracker
    from .diagnostics import EnergyTrace, sample_functionals

    grid = cfg.grid
    params = cfg.weight_params
    state = initial_state(cfg)
    n0 = sobolev_norm(state.omega_sheared_hat, cfg.sigma)
    trace = EnergyTrace(config=cfg, initial_norm=n0)
    tracker = CoordinateTracker(grid, cfg.nu, state.omega_sheared_hat) if cfg.track_coordinates else None

    def record(st):
        row = sample_functionals(st.omega_sheared_hat, st.t, params, cfg.epsilon, tracker, ref_norm=n0)
        trace.append(row)
        if on_record is not None:
            on_record(st, tracker)

    if not isinstance(cfg.dt, str):
        cfl = cfl_number(state.omega_sheared_hat, 0.0, cfg.dt)
        if cfl > cfg.cfl_max:
            raise ValueError(f"dt={cfg.dt} violates the advective CFL bound (CFL number {cfl:.3g})")
    record(state)
    ctl = PIController(cfg.rtol, 0.01) if cfg.dt == "adaptive" else None
    n_steps = 0
    max_cfl = 0.0
    try:
        while state.t < cfg.t_end * (1 - 1e-12):
            remaining = cfg.t_end - state.t
            if ctl is None:
                h = min(cfg.dt, remaining)
                # absorb a sliver at the end into the last step
                if remaining - h < 1e-9 * cfg.dt:
                    h = remaining
                state = step(state, h, cfg.nu, cfg.nonlinear)
            else:
                ctl.dt = min(ctl.dt, remaining)
                h, c = ctl.attempt(grid, cfg.nu, state.t, state.omega_sheared_hat.coeffs, cfg.nonlinear)
                t1 = state.t + h
                if remaining - h < 1e-12:
                    t1 = cfg.t_end
                state = SimState(t1, SpectralField(grid, c, t1))
            n_steps += 1
            if tracker is not None:
                tracker.advance(state.t, state.omega_sheared_hat)
            norm = sobolev_norm(state.omega_sheared_hat, cfg.sigma)
            if n0 > 0 and norm > cfg.ceiling * n0:
                record(state)
                trace.terminate("ceiling", state.t, f"||f||_H^sigma reached {norm / n0:.3g} x initial")
                break
            done = state.t >= cfg.t_end * (1 - 1e-12)
            if n_steps % cfg.record_every == 0 or done:
                if ctl is None and cfg.nonlinear:
                    max_cfl = max(max_cfl, cfl_number(state.omega_sheared_hat, state.t, h))
                record(state)
    except BlowUpError as exc:
        trace.terminate("blow-up", exc.t, str(exc))
    except CoordinateDegeneracy as exc:
        trace.terminate("coordinate-degeneracy", state.t, str(exc))
    trace.final_state = state
    trace.tracker = tracker
    trace.summary.update({"steps": n_steps, "max_cfl": max_cfl})
    trace.finish()
    return trace
