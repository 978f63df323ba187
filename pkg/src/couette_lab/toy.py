"""Echo toy model on one resonant interval and the reduced growth model.

The pair couples a mode at its critical time with a neighbouring mode::

    f_m'   = -nu (m^2 + (eta - m t)^2) f_m  + kappa e^{-c nu^(1/3) t} m^2 / |eta| f_n
    f_n'   = -nu eta^2 / m^2 f_n            + kappa |eta| e^{-c nu^(1/3) t} / (m^2 (1 + (eta/m - t)^2)) f_m

with n = m +- 1. The reduced model keeps only the second equation with f_m
replaced by f_n, no dissipation and the coupling frozen to nu^(1/3) with the
bracket <nu^(1/3) t_m>^(-(1+beta)); its solution is g_m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError
from .multipliers import ResonanceIndex, WeightParams, capital_E, log_G, rate_coefficient


@dataclass(frozen=True)
class ToyState:
    f_m: complex
    f_mpm1: complex
    m: int
    eta: float
    kappa: float
    nu: float
    beta: float = 0.5
    c: float = 1.0 / 3.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not (math.isfinite(abs(self.f_m)) and math.isfinite(abs(self.f_mpm1))):
            raise ValueError("toy state must be finite")


@dataclass
class ToyTrajectory:
    t: np.ndarray
    f_m: np.ndarray
    f_mpm1: np.ndarray
    model: str


def _rk4(rhs, t0: float, y0: np.ndarray, t1: float, n: int):
    h = (t1 - t0) / n
    ts = t0 + h * np.arange(n + 1)
    ys = np.empty((n + 1, y0.size), dtype=complex)
    y = y0.astype(complex)
    ys[0] = y
    for i in range(n):
        t = ts[i]
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise BlowUpError(t + h, f"toy integration failed (state {y})")
        ys[i + 1] = y
    ts[-1] = t1
    return ts, ys


def integrate_toy_pair(state: ToyState, t_span: tuple[float, float], model: str = "pair",
                       n_steps: int = 4000) -> ToyTrajectory:
    """Fixed-step RK4 on ``t_span``, which must lie inside I_{m, |eta|}.

    ``model="pair"`` integrates the coupled system; ``model="reduced"`` integrates
    the single equation whose exact solution is g_m (``f_m`` is carried unchanged).
    """
    a = abs(state.eta)
    m = state.m
    r = ResonanceIndex(m, a)
    lo, hi = r.interval
    slack = 1e-12 * hi
    t0, t1 = map(float, t_span)
    if not (lo - slack <= t0 <= t1 <= hi + slack):
        raise ValueError(f"t_span {t_span} not inside I_{m} = [{lo:.6g}, {hi:.6g}]")
    nu, kappa = state.nu, state.kappa
    nu3 = float(np.cbrt(nu))
    y0 = np.array([state.f_m, state.f_mpm1], dtype=complex)
    if model == "pair":
        def rhs(t, y):
            env = kappa * math.exp(-state.c * nu3 * t)
            tau = a / m - t
            return np.array([
                -nu * (m * m + (a - m * t) ** 2) * y[0] + env * m * m / a * y[1],
                -nu * a * a / (m * m) * y[1] + env * a / (m * m * (1.0 + tau * tau)) * y[0],
            ])
    elif model == "reduced":
        F = rate_coefficient(m, a, WeightParams(nu, state.beta))

        def rhs(t, y):
            tau = t - a / m
            return np.array([0.0, F / (1.0 + tau * tau) * y[1]])
    else:
        raise ValueError("model must be 'pair' or 'reduced'")
    ts, ys = _rk4(rhs, t0, y0, t1, n_steps)
    return ToyTrajectory(ts, ys[:, 0], ys[:, 1], model)


def toy_divergence(state: ToyState, n_steps: int = 4000) -> dict[str, float]:
    """Growth of f_{m+-1} across the whole interval under both layers of the model."""
    r = ResonanceIndex(state.m, abs(state.eta))
    pair = integrate_toy_pair(state, r.interval, "pair", n_steps)
    red = integrate_toy_pair(state, r.interval, "reduced", n_steps)
    gp = abs(pair.f_mpm1[-1] / state.f_mpm1)
    gr = abs(red.f_mpm1[-1] / state.f_mpm1)
    return {"pair_growth": gp, "reduced_growth": gr, "log_ratio": math.log(gp / gr)}


# -- total growth ---------------------------------------------------------------

REGIMES = ("low", "middle", "high")


def regime(nu: float, eta: float) -> str:
    """Branch of the total-growth bound: nu^(1/3)|eta| <= 1, up to E, or beyond E."""
    x = float(np.cbrt(nu)) * abs(eta)
    if x <= 1.0:
        return "low"
    return "middle" if x <= capital_E(eta) else "high"


@dataclass
class GrowthTable:
    nu: np.ndarray
    beta: np.ndarray
    eta: np.ndarray
    E: np.ndarray
    log_total: np.ndarray
    regime: list[str]

    @property
    def total(self) -> np.ndarray:
        return np.exp(self.log_total)

    @property
    def sup(self) -> float:
        return float(np.exp(np.max(self.log_total))) if self.log_total.size else 1.0

    def regime_constants(self) -> dict[str, float]:
        """Measured constants of the three branch bounds.

        low: log prod <= C nu^(1/3) |eta|; middle: log prod <= C;
        high: log prod <= C (nu^(1/3) |eta|^(1/2))^(-beta).
        """
        out = {}
        x = np.cbrt(self.nu) * np.abs(self.eta)
        reg = np.array(self.regime)
        scale = {
            "low": x,
            "middle": np.ones_like(x),
            "high": (np.cbrt(self.nu) * np.sqrt(np.abs(self.eta))) ** (-self.beta),
        }
        for name in REGIMES:
            m = reg == name
            out[name] = float(np.max(self.log_total[m] / scale[name][m])) if np.any(m) else 0.0
        return out

    def rows(self):
        for i in range(self.eta.size):
            yield {"nu": float(self.nu[i]), "beta": float(self.beta[i]), "eta": float(self.eta[i]),
                   "E": int(self.E[i]), "log_total": float(self.log_total[i]), "regime": self.regime[i]}


def log_total_growth(eta: float, nu: float, beta: float) -> float:
    """sum_{m=E}^{1} log G_m(eta), accumulated from m = E down (logs avoid overflow).

    ``beta`` may be 0 here for diagnostic probes (the weight itself requires beta > 0).
    """
    a = abs(float(eta))
    if a < 3:
        return 0.0
    nu3 = float(np.cbrt(nu))
    acc = 0.0
    for m in range(capital_E(a), 0, -1):
        tm = 2.0 * a / (2 * m + 1)
        F = (1.0 + (nu3 * tm) ** 2) ** (-(1.0 + beta) / 2.0) * nu3 * a / (m * m)
        acc += F * (math.atan(a / ((2 * m - 1) * m)) + math.atan(a / ((2 * m + 1) * m)))
    return acc


def total_growth_scan(params: WeightParams | list[tuple[float, float]], eta_grid) -> GrowthTable:
    """prod_m G_m(eta) for every eta in ``eta_grid`` (each >= 3).

    ``params`` is one :class:`WeightParams` or a list of (nu, beta) pairs; the
    table covers their product with ``eta_grid``.
    """
    etas = np.asarray(eta_grid, dtype=float)
    if np.any(np.abs(etas) < 3):
        raise ValueError("eta_grid must satisfy |eta| >= 3")
    pairs = [(params.nu, params.beta)] if isinstance(params, WeightParams) else list(params)
    nu_c, be_c, et_c, E_c, lg, rg = [], [], [], [], [], []
    for nu, beta in pairs:
        for e in etas:
            nu_c.append(nu)
            be_c.append(beta)
            et_c.append(e)
            E_c.append(capital_E(e))
            lg.append(log_total_growth(e, nu, beta))
            rg.append(regime(nu, e))
    return GrowthTable(np.array(nu_c), np.array(be_c), np.array(et_c), np.array(E_c, dtype=int),
                       np.array(lg), rg)
