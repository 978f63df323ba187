"""Pure numpy implementation of the ghost-weight kernel (fallback backend)."""
import numpy as np


def capital_e(a: np.ndarray) -> np.ndarray:
    """Largest integer E with (2E + 1) E <= a, elementwise for a >= 0."""
    a = np.asarray(a, dtype=float)
    E = np.floor((np.sqrt(1.0 + 8.0 * a) - 1.0) / 4.0)
    E = np.where((2 * E + 1) * E > a, E - 1, E)
    E = np.where((2 * E + 3) * (E + 1) <= a, E + 1, E)
    return E.astype(np.int64)


def _rate_coeff(m, a, nu3, beta):
    tm = 2.0 * a / (2.0 * m + 1.0)
    return (1.0 + (nu3 * tm) ** 2) ** (-(1.0 + beta) / 2.0) * nu3 * a / (m * m)


def log_growth(m, a, nu, beta):
    """log G_m(a) for resonant index m >= 1 and frequency a > 0."""
    m = np.asarray(m, dtype=float)
    nu3 = np.cbrt(nu)
    dm = a / ((2.0 * m + 1.0) * m)
    dp = a / ((2.0 * m - 1.0) * m)
    return _rate_coeff(m, a, nu3, beta) * (np.arctan(dp) + np.arctan(dm))


def log_weight(t, eta, nu, beta):
    """Return (log w(t, eta), d/dt log w(t, eta)) for paired 1D arrays."""
    t = np.ascontiguousarray(t, dtype=float)
    a = np.abs(np.ascontiguousarray(eta, dtype=float))
    logw = np.zeros(a.shape)
    rate = np.zeros(a.shape)
    active = a >= 3.0
    if not np.any(active):
        return logw, rate
    nu3 = np.cbrt(nu)
    E = np.where(active, capital_e(np.where(active, a, 3.0)), 0)
    tstart = np.where(active, 2.0 * a / (2.0 * E + 1.0), np.inf)
    started = active & (t > tstart)
    after = started & (t >= 2.0 * a)
    inside = started & ~after
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.floor((2.0 * a / np.where(inside, t, 1.0) + 1.0) / 2.0)
    j = np.where(inside, np.clip(j, 1, np.maximum(E, 1)), 0).astype(np.int64)
    lo = np.where(after, 0, j)
    for m in range(int(E[started].max(initial=0)), 0, -1):
        sel = started & (m <= E) & (m > lo)
        if np.any(sel):
            logw[sel] += log_growth(float(m), a[sel], nu, beta)
    if np.any(inside):
        ai = a[inside]
        ji = j[inside].astype(float)
        ti = t[inside]
        F = _rate_coeff(ji, ai, nu3, beta)
        dm = ai / ((2.0 * ji + 1.0) * ji)
        tau = ti - ai / ji
        logw[inside] += F * (np.arctan(tau) + np.arctan(dm))
        rate[inside] = F / (1.0 + tau * tau)
    return logw, rate
