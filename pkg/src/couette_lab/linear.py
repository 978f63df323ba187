"""Closed-form solution of the linearized problem around Couette flow.

In the sheared frame ``f(t, z, y) = omega(t, z + t y, y)`` each Fourier mode decays
independently::

    f_hat(t, k, eta) = f_hat(0, k, eta) exp(-nu int_0^t k^2 + (eta - k s)^2 ds)

The lab-frame coefficients follow from ``omega_hat(t, k, eta) = f_hat(t, k, eta + k t)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import Grid, SpectralField, eval_at_eta, shear_symbol


@dataclass(frozen=True)
class LinearSolution:
    omega0_hat: SpectralField
    nu: float

    def __post_init__(self):
        if not self.nu >= 0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")


def viscous_exponent(k, a, b, h):
    """int over a step of length h of k^2 + (eta - k s)^2, with a, b the sheared
    frequencies eta - k s at the two ends. Valid for k = 0 (then a = b)."""
    return k * k * h + h * (a * a + a * b + b * b) / 3.0


def decay_factor(grid: Grid, nu: float, t0: float, t1: float) -> np.ndarray:
    """exp(-nu int_{t0}^{t1} k^2 + (eta - k s)^2 ds) on the lattice."""
    K, ETA = grid.K, grid.ETA
    return np.exp(-nu * viscous_exponent(K, ETA - K * t0, ETA - K * t1, t1 - t0))


def lab_exponent(k, eta, t):
    """int_0^t k^2 + (eta + k t - k s)^2 ds in closed form (lab frequency eta)."""
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    safe = np.where(k == 0, 1.0, k)
    shifted = k * k * t + ((eta + k * t) ** 3 - eta**3) / (3.0 * safe)
    return np.where(k == 0, eta**2 * t, shifted)


def evolve_sheared(sol: LinearSolution, t: float) -> SpectralField:
    if t < 0:
        raise ValueError("t must be >= 0")
    g = sol.omega0_hat.grid
    return SpectralField(g, sol.omega0_hat.coeffs * decay_factor(g, sol.nu, 0.0, t), t)


def streamfunction(f: SpectralField, t: float) -> SpectralField:
    """psi_hat = -f_hat / (k^2 + (eta - k t)^2), zero-mean gauge."""
    sym = shear_symbol(f.grid, t)
    sym[0, 0] = 1.0
    c = -f.coeffs / sym
    c[0, 0] = 0.0
    return f.with_coeffs(c)


def out_of_band(grid: Grid, t: float) -> np.ndarray:
    """Lab-frame lattice points whose source frequency eta + k t leaves the resolved band."""
    return np.abs(grid.ETA + grid.K * t) > grid.eta_max


def evolve_linear(sol: LinearSolution, t: float, frame: str = "sheared"):
    """Return (omega_hat, psi_hat) at time t.

    ``frame="sheared"`` gives the coefficients of f (exact on the lattice).
    ``frame="lab"`` evaluates the initial data at the off-lattice shifted
    frequencies by band-limited interpolation; coefficients whose source lies
    outside the band are zero (see :func:`out_of_band`).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if frame == "sheared":
        f = evolve_sheared(sol, t)
        return f, streamfunction(f, t)
    if frame != "lab":
        raise ValueError(f"frame must be 'sheared' or 'lab', got {frame!r}")
    g = sol.omega0_hat.grid
    src = g.ETA + g.K * t
    vals = eval_at_eta(sol.omega0_hat, src)
    vals = np.where(out_of_band(g, t), 0.0, vals)
    w = SpectralField(g, vals * np.exp(-sol.nu * lab_exponent(g.K, g.ETA, t)), t)
    return w, streamfunction(w, 0.0)


def orr_amplification(k, eta, t):
    """1 / ((eta - k t)^2 + k^2); peaks at the critical time t = eta / k."""
    if np.any(np.asarray(k) == 0):
        raise ValueError("orr_amplification needs k != 0")
    k = np.asarray(k, dtype=float)
    out = 1.0 / ((np.asarray(eta, dtype=float) - k * np.asarray(t, dtype=float)) ** 2 + k * k)
    return float(out) if out.ndim == 0 else out


# -- envelopes ------------------------------------------------------------------

def damping_norms(f: SpectralField, t: float) -> dict[str, float]:
    """Nonzero-mode norms of a sheared-frame state at time t.

    ``dx_psi`` is ||d_x P psi||_2, ``dy_psi`` is ||d_y P psi||_2 and ``omega`` is
    ||P omega||_2; lab-frame L^2 norms equal their sheared counterparts.
    """
    g = f.grid
    c = np.array(f.coeffs)
    c[0, :] = 0.0
    sym = shear_symbol(g, t)
    sym[0, :] = 1.0
    psi = -c / sym
    return {
        "dx_psi": float(np.sqrt(np.sum(np.abs(g.K * psi) ** 2))),
        "dy_psi": float(np.sqrt(np.sum(np.abs((g.ETA - g.K * t) * psi) ** 2))),
        "omega": float(np.sqrt(np.sum(np.abs(c) ** 2))),
    }


def loglog_slope(t: np.ndarray, y: np.ndarray) -> float:
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (t > 0) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(t[ok]), np.log(y[ok]), 1)[0])


@dataclass
class EnvelopeReport:
    t: np.ndarray
    inviscid: np.ndarray  # ||d_y P psi|| + <t> ||d_x P psi||
    dx_psi: np.ndarray
    dy_psi: np.ndarray
    omega: np.ndarray
    C_id: float
    c_id: float
    C_ed: float
    c_ed: float
    slope_dx: float
    slope_dy: float
    slope_window: tuple[float, float]
    empty: bool = False
    notes: list[str] = field(default_factory=list)

    def rows(self):
        for i, ti in enumerate(self.t):
            yield {"t": float(ti), "inviscid": float(self.inviscid[i]), "dx_psi": float(self.dx_psi[i]),
                   "dy_psi": float(self.dy_psi[i]), "omega_nonzero": float(self.omega[i])}


def _fit_envelope(t, ratio, nu):
    """Fit ratio(t) <= C exp(-c nu t^3): c from least squares on log ratio, C the sup."""
    ok = ratio > 0
    if not np.any(ok):
        return 0.0, 0.0
    if nu > 0 and ok.sum() >= 2:
        x = nu * t[ok] ** 3
        if np.ptp(x) > 0:
            c = max(0.0, -float(np.polyfit(x, np.log(ratio[ok]), 1)[0]))
        else:
            c = 0.0
    else:
        c = 0.0
    C = float(np.max(ratio[ok] * np.exp(c * nu * t[ok] ** 3)))
    return C, c


def envelope_check(sol: LinearSolution, t_grid, slope_window=(10.0, 100.0)) -> EnvelopeReport:
    """Inviscid-damping and enhanced-dissipation envelopes along ``t_grid``.

    Fits ``inviscid <= C_id <t>^-1 exp(-c_id nu t^3) ||P omega_in||_{H^2}`` and
    ``||P omega|| <= C_ed ||P omega_in||_2 exp(-c_ed nu t^3)``; also reports the
    log-log slopes of ||d_x P psi|| and ||d_y P psi|| inside ``slope_window``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise ValueError("empty t_grid")
    if np.any(t < 0):
        raise ValueError("t_grid must be >= 0")
    f0 = sol.omega0_hat
    norms = [damping_norms(evolve_sheared(sol, ti), ti) for ti in t]
    dx = np.array([n["dx_psi"] for n in norms])
    dy = np.array([n["dy_psi"] for n in norms])
    om = np.array([n["omega"] for n in norms])
    tb = np.sqrt(1.0 + t**2)
    inviscid = dy + tb * dx
    c0 = np.array(f0.coeffs)
    c0[0, :] = 0.0
    l2_in = float(np.sqrt(np.sum(np.abs(c0) ** 2)))
    h2_in = float(np.sqrt(np.sum((1.0 + f0.grid.K**2 + f0.grid.ETA**2) ** 2 * np.abs(c0) ** 2)))
    if l2_in == 0.0:
        return EnvelopeReport(t, inviscid, dx, dy, om, 0.0, 0.0, 0.0, 0.0, float("nan"), float("nan"),
                              tuple(slope_window), empty=True, notes=["no nonzero modes in the initial data"])
    C_id, c_id = _fit_envelope(t, inviscid * tb / h2_in, sol.nu)
    C_ed, c_ed = _fit_envelope(t, om / l2_in, sol.nu)
    lo, hi = slope_window
    win = (t >= lo) & (t <= hi)
    return EnvelopeReport(
        t, inviscid, dx, dy, om, C_id, c_id, C_ed, c_ed,
        loglog_slope(t[win], dx[win]), loglog_slope(t[win], dy[win]), (lo, hi),
    )
