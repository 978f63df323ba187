"""Functionals monitored along a run: weighted energies, CK term, bootstrap ratios, envelopes."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from .coords import CoordinateState, remap_to_moving_frame
from .multipliers import D_mult, WeightParams, WeightTable, varrho
from .spectral import Grid, SpectralField, profile_coeffs, shear_symbol, sobolev_norm

SCHEMA_VERSION = "couette-lab-trace/1"

COLUMNS = [
    "t", "coords_active", "f_Hsigma", "omega_moving_Hsigma", "stability_ratio",
    "E_sigma", "E_v", "A_sigma_sq", "CK_w", "diss_A_sigma", "A_E_sq", "diss_A_E",
    "nonzero_l2", "nonzero_enstrophy", "Ux_neq_norm", "Uy_norm",
    "g_Hs", "g_Hs6", "dvg_Hs6_sq", "h_Hs", "h_Hs1", "dvh_Hs_sq", "dvh_Hs1_sq",
    "hbar_Hs", "hbar_Hs1", "hbar_Hs6", "dvhbar_Hs6_sq", "A_hbar_sq", "ck_hbar", "dvA_hbar_sq",
    "f0_Hs_sq", "dvf0_Hs_sq", "vprime_min", "envelope_ed", "envelope_id",
]


@lru_cache(maxsize=32)
def _lattice_table(grid: Grid, params: WeightParams) -> WeightTable:
    return WeightTable(varrho(grid.K, grid.ETA), params)


@lru_cache(maxsize=32)
def _profile_table(grid: Grid, params: WeightParams) -> WeightTable:
    return WeightTable(grid.eta, params)


def _sq(x) -> float:
    return float(np.sum(np.abs(x) ** 2))


def weighted_coeffs(f_hat: SpectralField, t: float, params: WeightParams):
    """(A^sigma f_hat, d_t w / w) on the lattice."""
    lw, rate = _lattice_table(f_hat.grid, params).log_weight_and_rate(t)
    return f_hat.grid.bracket ** params.sigma * np.exp(-lw) * f_hat.coeffs, rate


def ck_w(f_hat: SpectralField, t: float, params: WeightParams) -> float:
    """sum (d_t w_k / w_k) |A^sigma_k f_hat_k|^2 (nonnegative)."""
    af, rate = weighted_coeffs(f_hat, t, params)
    return float(np.sum(rate * np.abs(af) ** 2))


def A_E_coeffs(f_hat: SpectralField, t: float, params: WeightParams) -> np.ndarray:
    g = f_hat.grid
    out = g.bracket ** params.s * D_mult(t, g.ETA, params) * f_hat.coeffs
    out[0, :] = 0.0
    return out


def _profile_norms(grid: Grid, p: np.ndarray, sigma: float, deriv: int = 0) -> float:
    c = profile_coeffs(grid, p) * (1j * grid.eta) ** deriv
    if deriv % 2:
        c[grid.Nv // 2] = 0.0
    return float(np.sqrt(np.sum((1.0 + grid.eta**2) ** sigma * np.abs(c) ** 2)))


def coordinate_energy(coords: CoordinateState, params: WeightParams) -> float:
    """E_v = ||g||^2_s + nu^(1/3)(||h||^2_s + ||hbar||^2_s) + ||h||^2_{s-1} + ||hbar||^2_{s-1}, s = sigma."""
    gr, sig, n3 = coords.grid, params.sigma, params.nu3
    nrm = lambda p, s: _profile_norms(gr, p, s) ** 2  # noqa: E731
    return (nrm(coords.g, sig) + n3 * (nrm(coords.h, sig) + nrm(coords.hbar, sig))
            + nrm(coords.h, sig - 1) + nrm(coords.hbar, sig - 1))


def energy_sigma(f_hat: SpectralField, coords: CoordinateState | None, t: float,
                 params: WeightParams) -> dict[str, float]:
    """E^sigma = ||A^sigma f||^2 / 2 + E_v (E_v = 0 without coordinates)."""
    af, _ = weighted_coeffs(f_hat, t, params)
    e_v = coordinate_energy(coords, params) if coords is not None else 0.0
    return {"E_sigma": 0.5 * _sq(af) + e_v, "E_v": e_v}


def _japanese(x) -> float:
    return math.sqrt(1.0 + x * x)


def sample_functionals(f_s: SpectralField, t: float, params: WeightParams, eps: float,
                       tracker=None, ref_norm: float = 0.0) -> dict[str, float]:
    """One trace row for the sheared-frame state ``f_s`` at time t.

    With a coordinate tracker and t >= 1 the weighted quantities use the
    moving-frame field; before that the moving frame is taken as the sheared one.
    """
    grid = f_s.grid
    nu = params.nu
    row = dict.fromkeys(COLUMNS, 0.0)
    row["t"] = float(t)
    coords = None
    f = f_s
    if tracker is not None and t >= 1.0:
        coords = tracker.state(f_s)
        f = remap_to_moving_frame(f_s, coords)
        row["coords_active"] = 1.0
    row["f_Hsigma"] = sobolev_norm(f_s, params.sigma)
    row["omega_moving_Hsigma"] = sobolev_norm(f, params.sigma)
    row["stability_ratio"] = row["omega_moving_Hsigma"] / ref_norm if ref_norm > 0 else 0.0
    af, rate = weighted_coeffs(f, t, params)
    sym = shear_symbol(grid, t)
    row["A_sigma_sq"] = _sq(af)
    row["CK_w"] = float(np.sum(rate * np.abs(af) ** 2))
    row["diss_A_sigma"] = nu * float(np.sum(sym * np.abs(af) ** 2))
    ae = A_E_coeffs(f, t, params)
    row["A_E_sq"] = _sq(ae)
    row["diss_A_E"] = nu * float(np.sum(sym * np.abs(ae) ** 2))
    cs = np.array(f_s.coeffs)
    cs[0, :] = 0.0
    row["nonzero_enstrophy"] = _sq(cs)
    row["nonzero_l2"] = math.sqrt(row["nonzero_enstrophy"])
    sym0 = sym.copy()
    sym0[0, 0] = 1.0
    psi = -f_s.coeffs / sym0
    psi[0, 0] = 0.0
    ux = -1j * (grid.ETA - grid.K * t) * psi
    ux[0, :] = 0.0
    row["Ux_neq_norm"] = math.sqrt(_sq(ux))
    row["Uy_norm"] = math.sqrt(_sq(1j * grid.K * psi))
    e_v = 0.0
    if coords is not None:
        sig, s = params.sigma, params.s
        pn = lambda p, q, d=0: _profile_norms(grid, p, q, d)  # noqa: E731
        g, h, hb = coords.g, coords.h, coords.hbar
        row.update(
            g_Hs=pn(g, sig), g_Hs6=pn(g, sig - 6), dvg_Hs6_sq=pn(g, sig - 6, 1) ** 2,
            h_Hs=pn(h, sig), h_Hs1=pn(h, sig - 1), dvh_Hs_sq=pn(h, sig, 1) ** 2,
            dvh_Hs1_sq=pn(h, sig - 1, 1) ** 2,
            hbar_Hs=pn(hb, sig), hbar_Hs1=pn(hb, sig - 1), hbar_Hs6=pn(hb, sig - 6),
            dvhbar_Hs6_sq=pn(hb, sig - 6, 1) ** 2,
            f0_Hs_sq=pn(coords.f0, s) ** 2, dvf0_Hs_sq=pn(coords.f0, s, 1) ** 2,
            vprime_min=float(np.min(coords.vprime)),
        )
        lw0, rate0 = _profile_table(grid, params).log_weight_and_rate(t)
        ahb = (1.0 + grid.eta**2) ** (sig / 2) * np.exp(-lw0) * profile_coeffs(grid, hb)
        row["A_hbar_sq"] = _sq(ahb)
        row["ck_hbar"] = float(np.sum(rate0 * np.abs(ahb) ** 2))
        dahb = 1j * grid.eta * ahb
        dahb[grid.Nv // 2] = 0.0
        row["dvA_hbar_sq"] = _sq(dahb)
        e_v = (row["g_Hs"] ** 2 + params.nu3 * (row["h_Hs"] ** 2 + row["hbar_Hs"] ** 2)
               + row["h_Hs1"] ** 2 + row["hbar_Hs1"] ** 2)
    else:
        row["vprime_min"] = 1.0
    row["E_v"] = e_v
    row["E_sigma"] = 0.5 * row["A_sigma_sq"] + e_v
    scale = eps * params.nu3
    if scale > 0:
        nt3 = _japanese(nu * t**3)
        row["envelope_ed"] = row["nonzero_l2"] * nt3 / scale
        row["envelope_id"] = (row["Ux_neq_norm"] + _japanese(t) * row["Uy_norm"]) * _japanese(t) * nt3 / scale
    return row


# -- traces -------------------------------------------------------------------------

@dataclass
class EnergyTrace:
    """Time series of :data:`COLUMNS` plus terminal events and a run summary."""

    config: Any = None
    initial_norm: float = 0.0
    samples: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    classification: str = "running"
    summary: dict = field(default_factory=dict)
    final_state: Any = None
    tracker: Any = None

    def append(self, row: dict) -> None:
        if self.samples and not row["t"] > self.samples[-1]["t"]:
            raise ValueError("trace times must increase strictly")
        self.samples.append(row)
        bad = [k for k, v in row.items() if not math.isfinite(v)]
        if bad:
            self.terminate("non-finite", row["t"], f"non-finite entries: {', '.join(bad)}")

    def terminate(self, kind: str, t: float, message: str) -> None:
        self.events.append({"kind": kind, "t": float(t), "message": message})

    def finish(self) -> None:
        self.classification = "unstable" if self.events else "stable"
        if self.samples:
            self.summary["sup_f_ratio"] = (max(r["f_Hsigma"] for r in self.samples) / self.initial_norm
                                           if self.initial_norm > 0 else 0.0)
            self.summary["t_last"] = self.samples[-1]["t"]

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.samples], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {SCHEMA_VERSION} (columns documented in couette_lab/data/trace_schema.toml)\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.samples:
            w.writerow([format(r[c], ".17g") for c in COLUMNS])
        return buf.getvalue()


def read_trace_csv(text: str) -> EnergyTrace:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    tr = EnergyTrace()
    for r in rows:
        tr.samples.append({k: float(v) for k, v in r.items()})
    return tr


# -- bootstrap hypotheses ------------------------------------------------------------

BOOTSTRAP_NAMES = [
    "B1_main", "B1_g", "B1_hbar", "B1_h", "B2_enh", "B2_g", "B2_hbar", "B2_f0", "as_hbar", "as_h",
]


@dataclass
class BootstrapSeries:
    name: str
    t: np.ndarray
    ratio: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratio)) if self.ratio.size else 0.0

    @property
    def first_violation(self) -> float | None:
        idx = np.nonzero(self.ratio >= 1.0)[0]
        return float(self.t[idx[0]]) if idx.size else None


def _cumtrapz(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    if y.size > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def bootstrap_monitor(trace: EnergyTrace, eps: float, nu: float) -> dict[str, BootstrapSeries]:
    """LHS/RHS of each bootstrap inequality for the samples with t >= 1.

    Time integrals run from the first such sample (trapezoid rule).
    """
    act = [r for r in trace.samples if r["t"] >= 1.0]
    t = np.array([r["t"] for r in act], dtype=float)
    c = {k: np.array([r[k] for r in act], dtype=float) for k in COLUMNS}
    if eps == 0:
        return {k: BootstrapSeries(k, t, np.zeros_like(t)) for k in BOOTSTRAP_NAMES}
    I = lambda y: _cumtrapz(t, y)  # noqa: E731
    n3, n6 = nu ** (1 / 3), nu ** (1 / 6)
    tb = np.sqrt(1.0 + t**2)
    r_main = (8 * eps * n3) ** 2
    r_lin = 8 * eps * n3
    series = {
        "B1_main": (c["A_sigma_sq"] + I(c["diss_A_sigma"]) + I(c["CK_w"])) / r_main,
        "B1_g": (tb * c["g_Hs"] + I(c["g_Hs"])) / r_lin,
        "B1_hbar": (t**3 * c["A_hbar_sq"] + I(t**3 * c["ck_hbar"]) + 0.25 * I(t**2 * c["A_hbar_sq"])
                    + 0.25 * nu * I(t**3 * c["dvA_hbar_sq"])) / (8 * eps * (eps * n6) ** 2),
        "B1_h": (c["h_Hs"] ** 2 + nu * I(c["dvh_Hs_sq"])) / (8 * (10 * eps * n6) ** 2),
        "B2_enh": (c["A_E_sq"] + 0.4 * I(c["diss_A_E"])) / r_main,
        "B2_g": (tb**4 * c["g_Hs6"] ** 2 + nu * I(t**4 * c["dvg_Hs6_sq"])) / r_main,
        "B2_hbar": (tb**4 * c["hbar_Hs6"] ** 2 + nu * I(t**4 * c["dvhbar_Hs6_sq"])) / r_main,
        "B2_f0": (c["f0_Hs_sq"] + 0.5 * t * nu * c["dvf0_Hs_sq"]
                  + nu * I(c["dvf0_Hs_sq"] + 0.5 * t * nu * c["dvf0_Hs_sq"])) / r_main,
        "as_hbar": (tb * c["hbar_Hs1"] + I(c["hbar_Hs1"])) / r_lin,
        "as_h": (c["h_Hs1"] ** 2 + nu * I(c["dvh_Hs1_sq"])) / (8 * (10 * eps * n3) ** 2),
    }
    return {k: BootstrapSeries(k, t, np.nan_to_num(series[k], nan=np.inf)) for k in BOOTSTRAP_NAMES}


# -- theorem report ------------------------------------------------------------------

@dataclass
class DecayReport:
    sup_stability_ratio: float
    C_ed_sup: float
    C_ed_fit: float
    C_id_sup: float
    C_id_fit: float
    fit_window: tuple[float, float]
    sigma: float
    partial: bool
    checks: dict[str, bool]

    def passed(self) -> bool:
        return all(self.checks.values())


def _fit_constant(t, ratio, lo, hi):
    """Least squares for log C in log ratio = log C over [lo, hi]."""
    m = (t >= lo) & (t <= hi) & (ratio > 0)
    if not np.any(m):
        return 0.0
    return float(np.exp(np.mean(np.log(ratio[m]))))


def theorem_report(trace: EnergyTrace, nu: float, sigma: float, ceilings: dict | None = None) -> DecayReport:
    """Stability ratio and envelope constants; pass/fail against ``ceilings``.

    Envelopes are fitted over t in [nu^(-1/3), t_end], where the decay is active.
    """
    from .lemmas import load_ceilings

    ceil = ceilings if ceilings is not None else load_ceilings()["theorem"]
    t = trace.column("t")
    if t.size == 0:
        return DecayReport(0.0, 0.0, 0.0, 0.0, 0.0, (0.0, 0.0), sigma, True, {})
    lo, hi = nu ** (-1 / 3), float(t[-1])
    ed, idd = trace.column("envelope_ed"), trace.column("envelope_id")
    stab = trace.column("stability_ratio")
    rep = DecayReport(
        sup_stability_ratio=float(np.max(stab)),
        C_ed_sup=float(np.max(ed)), C_ed_fit=_fit_constant(t, ed, lo, hi),
        C_id_sup=float(np.max(idd)), C_id_fit=_fit_constant(t, idd, lo, hi),
        fit_window=(lo, hi), sigma=sigma, partial=bool(trace.events), checks={},
    )
    rep.checks = {
        "stability": rep.sup_stability_ratio <= ceil["stability_ratio"],
        "enhanced_dissipation": rep.C_ed_sup <= ceil["C_ed"],
        "inviscid_damping": rep.C_id_sup <= ceil["C_id"],
    }
    return rep
