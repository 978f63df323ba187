"""Resonant-interval bookkeeping, the ghost weight ``w`` and the Fourier multipliers.

For a frequency ``|eta| >= 3`` the resonant intervals are
``I_m = [t_m, t_{m-1}]`` with ``t_m = 2|eta| / (2m + 1)``, ``1 <= m <= E``, and
the window ``[t(eta), 2|eta|]`` with ``t(eta) = t_E``. On ``I_m`` the weight grows by
the factor ``g_m`` of the reduced echo model; ``w`` is the running product of the
completed jumps ``G_m`` and the current partial factor. All functions accept
scalars or numpy arrays and are even in ``eta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._kernels_py import capital_e as _capital_e_array
from ._kernels_py import log_growth as _log_growth
from .errors import NoResonantWindow


@dataclass(frozen=True)
class WeightParams:
    """Parameter pack for the weights: viscosity, growth exponent and Sobolev indices."""

    nu: float
    beta: float = 0.5
    sigma: float = 12.0
    s: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.nu <= 1.0):
            raise ValueError(f"nu must lie in (0, 1], got {self.nu}")
        if not (0.0 < self.beta <= 0.5):
            raise ValueError(f"beta must lie in (0, 1/2], got {self.beta}")
        if not (0.0 < self.s <= self.sigma):
            raise ValueError(f"need 0 < s <= sigma, got s={self.s}, sigma={self.sigma}")

    @property
    def nu3(self) -> float:
        return float(np.cbrt(self.nu))


@dataclass(frozen=True)
class ResonanceIndex:
    """The m-th resonant interval of a positive frequency eta."""

    m: int
    eta: float

    def __post_init__(self):
        if self.m < 1 or self.eta <= 0:
            raise ValueError("resonance index needs m >= 1 and eta > 0")

    @property
    def t_m(self) -> float:
        return 2.0 * self.eta / (2 * self.m + 1)

    @property
    def t_prev(self) -> float:
        """Right endpoint t_{m-1}."""
        return 2.0 * self.eta / (2 * self.m - 1)

    @property
    def center(self) -> float:
        return self.eta / self.m

    @property
    def D_minus(self) -> float:
        return self.eta / ((2 * self.m + 1) * self.m)

    @property
    def D_plus(self) -> float:
        return self.eta / ((2 * self.m - 1) * self.m)

    @property
    def interval(self) -> tuple[float, float]:
        return self.t_m, self.t_prev


def _ret(x, scalar: bool):
    return float(x) if scalar else x


def capital_E(eta: float) -> int:
    """Largest integer E with (2E + 1) E <= |eta|."""
    a = abs(float(eta))
    if not a >= 3.0:
        raise NoResonantWindow(f"|eta| = {a} < 3 has no resonant window")
    return int(_capital_e_array(np.array([a]))[0])


def resonant_window(eta: float) -> tuple[float, float]:
    """(t(eta), 2|eta|)."""
    a = abs(float(eta))
    return 2.0 * a / (2 * capital_E(a) + 1), 2.0 * a


def rate_coefficient(m: int, eta: float, params: WeightParams) -> float:
    """F_m = <nu^(1/3) t_m>^(-(1+beta)) nu^(1/3) |eta| / m^2 (peak value of d_t w / w on I_m)."""
    a = abs(float(eta))
    nu3 = params.nu3
    tm = 2.0 * a / (2.0 * m + 1.0)
    return (1.0 + (nu3 * tm) ** 2) ** (-(1.0 + params.beta) / 2.0) * nu3 * a / (m * m)


def log_G(m: int, eta: float, params: WeightParams) -> float:
    """log of the total jump G_m(eta) = g_m(D_plus, eta); 0 when m is outside 1..E."""
    a = abs(float(eta))
    if a < 3.0 or m < 1 or m > capital_E(a):
        return 0.0
    return float(_log_growth(float(m), a, params.nu, params.beta))


def growth_factor_g(m: int, eta: float, tau, params: WeightParams):
    """g_m(tau, eta) on tau in [-D_minus, D_plus]; identically 1 when m > E."""
    a = abs(float(eta))
    scalar = np.ndim(tau) == 0
    tau = np.asarray(tau, dtype=float)
    if a < 3.0 or m < 1 or m > capital_E(a):
        return _ret(np.ones_like(tau), scalar)
    r = ResonanceIndex(m, a)
    slack = 1e-12 * max(1.0, r.D_plus)
    if np.any(tau < -r.D_minus - slack) or np.any(tau > r.D_plus + slack):
        raise ValueError(f"tau outside [-{r.D_minus:.6g}, {r.D_plus:.6g}]")
    F = rate_coefficient(m, a, params)
    return _ret(np.exp(F * (np.arctan(tau) + math.atan(r.D_minus))), scalar)


def total_growth(eta: float, params: WeightParams) -> float:
    """prod_m G_m(eta) = w(t, eta) for t >= 2|eta|."""
    return weight_w(2.0 * abs(float(eta)), eta, params)


def log_weight(t, eta, params: WeightParams):
    scalar = np.ndim(t) == 0 and np.ndim(eta) == 0
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    lw, _ = kernels.log_weight(t, eta, params.nu, params.beta)
    return _ret(lw, scalar)


def weight_w(t, eta, params: WeightParams):
    """Ghost weight w(t, eta) >= 1, nondecreasing in t, constant for t >= 2|eta|."""
    scalar = np.ndim(t) == 0 and np.ndim(eta) == 0
    return _ret(np.exp(log_weight(t, eta, params)), scalar)


def dtw_over_w(t, eta, params: WeightParams):
    """d_t w / w: a Lorentzian in t - eta/m on I_m, zero outside the window."""
    scalar = np.ndim(t) == 0 and np.ndim(eta) == 0
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    _, rate = kernels.log_weight(t, eta, params.nu, params.beta)
    return _ret(rate, scalar)


def in_window(t, eta):
    """Indicator of t in [t(eta), 2|eta|] (zero for |eta| < 3)."""
    a = np.abs(np.asarray(eta, dtype=float))
    t = np.asarray(t, dtype=float)
    safe = np.where(a >= 3.0, a, 3.0)
    E = _capital_e_array(safe)
    return (a >= 3.0) & (t >= 2.0 * safe / (2 * E + 1)) & (t <= 2.0 * safe)


# frequency blender -----------------------------------------------------------

RHO_LO, RHO_HI = 1.0 / 20.0, 1.0 / 10.0


def rho_profile(x):
    """rho: 0 below 1/20, 1 above 1/10, C^1 polynomial bridge with integral 1/20 on it.

    With ``u = 20 (x - 1/20)`` the bridge is ``3u^2 - 2u^3 + 15 u^2 (1 - u)^2``:
    a smoothstep plus a bump that raises its mean from 1/2 to 1.
    """
    x = np.abs(np.asarray(x, dtype=float))
    u = np.clip((x - RHO_LO) / (RHO_HI - RHO_LO), 0.0, 1.0)
    return 3 * u**2 - 2 * u**3 + 15 * u**2 * (1 - u) ** 2


def _rho_primitive(y):
    """int_0^y rho for y >= 0."""
    y = np.asarray(y, dtype=float)
    u = np.clip((y - RHO_LO) / (RHO_HI - RHO_LO), 0.0, 1.0)
    bridge = (RHO_HI - RHO_LO) * (6 * u**3 - 8 * u**4 + 3 * u**5)
    return np.where(y >= RHO_HI, RHO_LO + (y - RHO_HI), bridge)


def varrho(k, eta):
    """Blended frequency: k/20 while |eta| <= |k|/20, |eta| once |eta| >= |k|/10, eta when k = 0.

    Odd in k and even in eta for k != 0; only |varrho| enters the weights.
    """
    scalar = np.ndim(k) == 0 and np.ndim(eta) == 0
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    ak = np.abs(k)
    safe = np.where(ak > 0, ak, 1.0)
    ae = np.abs(eta)
    y = ae / safe
    blended = np.sign(k) * np.where(y >= RHO_HI, ae, ak / 20.0 + ak * _rho_primitive(y))
    return _ret(np.where(ak > 0, blended, eta + 0.0 * k), scalar)


# multipliers ---------------------------------------------------------------

def japanese(*xs):
    """<x_1, ..., x_n> = sqrt(1 + sum x_i^2)."""
    return np.sqrt(1.0 + sum(np.asarray(x, dtype=float) ** 2 for x in xs))


def D_mult(t, eta, params: WeightParams):
    """D(t, eta) = nu|eta|^3/3 + nu (t^3 - 8|eta|^3)_+ / 24."""
    scalar = np.ndim(t) == 0 and np.ndim(eta) == 0
    a3 = np.abs(np.asarray(eta, dtype=float)) ** 3
    t3 = np.asarray(t, dtype=float) ** 3
    return _ret(params.nu * a3 / 3.0 + params.nu * np.maximum(t3 - 8.0 * a3, 0.0) / 24.0, scalar)


def A_sigma(k, eta, t, params: WeightParams, sigma: float | None = None):
    """<k, eta>^sigma / w(t, varrho(k, eta))."""
    scalar = all(np.ndim(x) == 0 for x in (k, eta, t))
    sig = params.sigma if sigma is None else sigma
    w = np.exp(kernels.log_weight(t, varrho(k, eta), params.nu, params.beta)[0])
    return _ret(japanese(k, eta) ** sig / w, scalar)


def A_E(k, eta, t, params: WeightParams, s: float | None = None):
    """<k, eta>^s D(t, eta); only defined on nonzero modes."""
    scalar = all(np.ndim(x) == 0 for x in (k, eta, t))
    if np.any(np.asarray(k) == 0):
        raise ValueError("A_E is a nonzero-mode multiplier; k = 0 given")
    s = params.s if s is None else s
    return _ret(japanese(k, eta) ** s * D_mult(t, eta, params), scalar)


class WeightTable:
    """Memoized weights for a fixed frequency array, evaluated at many times.

    Suffix sums ``sum_{m=j+1}^{E} log G_m`` are built once per frequency (accumulated
    from m = E downward, the same order as the pointwise kernel) so each evaluation
    costs O(1) per frequency.
    """

    def __init__(self, eta, params: WeightParams):
        self.params = params
        self.shape = np.shape(eta)
        a = np.abs(np.asarray(eta, dtype=float)).ravel()
        self._a = a
        self._active = a >= 3.0
        safe = np.where(self._active, a, 3.0)
        self._E = np.where(self._active, _capital_e_array(safe), 0)
        Emax = int(self._E.max(initial=0))
        # tail[i, j] = sum_{m=j+1}^{E_i} log G_m(a_i)
        tail = np.zeros((a.size, Emax + 1))
        for m in range(Emax, 0, -1):
            sel = m <= self._E
            contrib = np.zeros(a.size)
            contrib[sel] = _log_growth(float(m), a[sel], params.nu, params.beta)
            tail[:, m - 1] = tail[:, m] + contrib
        self._tail = tail
        self._tstart = np.where(self._active, 2.0 * safe / (2.0 * self._E + 1.0), np.inf)
        tail.flags.writeable = False

    def log_weight_and_rate(self, t: float):
        a, E = self._a, self._E
        lw = np.zeros(a.size)
        rate = np.zeros(a.size)
        started = self._active & (t > self._tstart)
        after = started & (t >= 2.0 * a)
        inside = started & ~after
        idx = np.nonzero(after)[0]
        lw[idx] = self._tail[idx, 0]
        idx = np.nonzero(inside)[0]
        if idx.size:
            ai = a[idx]
            j = np.clip(np.floor((2.0 * ai / t + 1.0) / 2.0), 1, E[idx]).astype(np.int64)
            jf = j.astype(float)
            nu3 = self.params.nu3
            tm = 2.0 * ai / (2.0 * jf + 1.0)
            F = (1.0 + (nu3 * tm) ** 2) ** (-(1.0 + self.params.beta) / 2.0) * nu3 * ai / (jf * jf)
            tau = t - ai / jf
            lw[idx] = self._tail[idx, j] + F * (np.arctan(tau) + np.arctan(ai / ((2.0 * jf + 1.0) * jf)))
            rate[idx] = F / (1.0 + tau * tau)
        return lw.reshape(self.shape), rate.reshape(self.shape)

    def weight(self, t: float) -> np.ndarray:
        return np.exp(self.log_weight_and_rate(t)[0])
