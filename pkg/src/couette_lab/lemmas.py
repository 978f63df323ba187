"""Sampling harness for the multiplier and product lemmas.

Sampling cannot prove an inequality. Each suite measures the worst constant
over a deterministic sample set (stratified random plus adversarial corners) and
compares it against a pinned ceiling from ``data/ceilings.toml``. A violation
means the implementation drifted (or a corner was found); the witness that
produced the worst constant is recorded and can be replayed.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from . import kernels
from .multipliers import D_mult, WeightParams, capital_E, japanese, varrho
from ._kernels_py import capital_e as _capital_e_arr
from .spectral import Grid, SpectralField, coeffs_from_values, dealias, values_from_coeffs

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


def load_ceilings() -> dict:
    text = resources.files("couette_lab").joinpath("data/ceilings.toml").read_text()
    return tomllib.loads(text)


@dataclass
class LemmaCheck:
    name: str
    kind: str  # "upper": worst = max <= bound; "lower": worst = min >= bound
    samples: int
    worst: float
    witness: dict
    bound: float
    note: str = ""

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.worst):
            return False
        return self.worst <= self.bound if self.kind == "upper" else self.worst >= self.bound


@dataclass
class LemmaSuiteResult:
    lemma_id: str
    seed: int
    checks: list[LemmaCheck] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def samples(self) -> int:
        return sum(c.samples for c in self.checks)

    @property
    def worst_constant(self) -> float:
        return self.checks[0].worst

    @property
    def worst_witness(self) -> dict:
        return self.checks[0].witness

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# lemma suite {self.lemma_id}, seed {self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lemma", "check", "kind", "samples", "worst", "bound", "pass", "witness"])
        for c in self.checks:
            w.writerow([self.lemma_id, c.name, c.kind, c.samples, format(c.worst, ".17g"),
                        format(c.bound, ".17g"), int(c.passed), json.dumps(c.witness, sort_keys=True)])
        return buf.getvalue()

    def witness_json(self) -> str:
        doc = {"lemma": self.lemma_id, "seed": self.seed, "info": self.info,
               "checks": {c.name: {"worst": c.worst, "witness": c.witness, "bound": c.bound,
                                   "kind": c.kind, "note": c.note} for c in self.checks}}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _pick(values: np.ndarray, kind: str) -> int:
    v = np.where(np.isfinite(values), values, -np.inf if kind == "upper" else np.inf)
    return int(np.argmax(v) if kind == "upper" else np.argmin(v))


def _check(name, kind, values, columns: dict, evaluator, lemma, bound_src, note=""):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return LemmaCheck(name, kind, 0, float("nan"), {}, float("nan"), note)
    i = _pick(values, kind)
    wit = {k: (v[i].item() if isinstance(v, np.ndarray) else v) for k, v in columns.items()}
    _EVAL[(lemma, name)] = evaluator
    spec = bound_src[lemma][name.replace("-", "_")]
    return LemmaCheck(name, kind, int(values.size), float(values[i]), wit, float(spec["bound"]), note)


_EVAL: dict[tuple[str, str], Callable[[dict], float]] = {}


def replay(lemma_id: str, check: str, witness: dict) -> float:
    """Recompute the constant of one check at a serialized witness."""
    if (lemma_id, check) not in _EVAL:
        run_suite(lemma_id, sample_budget=1000, seed=0)
    return float(_EVAL[(lemma_id, check)](witness))


# -- rho ---------------------------------------------------------------------------

def _rho_equiv(k, eta):
    return np.maximum(np.abs(varrho(k, eta)) / japanese(k, eta), japanese(k, eta) / np.abs(varrho(k, eta)))


def _rho_lip(k, eta, l, xi):
    d = np.sqrt((k - l) ** 2 + (xi - eta) ** 2)
    return np.abs(np.abs(varrho(k, eta)) - np.abs(varrho(l, xi))) / d


def _suite_rho(budget, rng, ceil):
    n = budget // 2
    # equivalence over the lattice |k, eta| >= 1, with the blending corners |eta| = |k|/20, |k|/10
    k = rng.integers(-400, 401, n).astype(float)
    eta = rng.uniform(-400, 400, n)
    kc = np.arange(1, 401, dtype=float)
    k = np.concatenate([k, kc, kc, -kc, kc, kc * 0.0 + 0.0])
    eta = np.concatenate([eta, kc / 20, kc / 10, kc / 15, -kc / 20, kc])
    keep = np.hypot(k, eta) >= 1.0
    k, eta = k[keep], eta[keep]
    c1 = _rho_equiv(k, eta)
    # Lipschitz on pairs with |k - l, xi - eta| <= |l, xi| / 100, stressed near the blend
    # where |xi| ~ |l| ~ |eta| ~ |k|
    l = rng.integers(-2000, 2001, n).astype(float)
    frac = rng.uniform(0, 0.15, n)
    xi = np.where(rng.uniform(size=n) < 0.7, np.sign(rng.uniform(-1, 1, n)) * frac * np.abs(l),
                  rng.uniform(-2000, 2000, n))
    r = np.hypot(l, xi) / 100
    dk = np.round(rng.uniform(-1, 1, n) * r)
    rem = np.sqrt(np.maximum(r**2 - dk**2, 0))
    de = rng.uniform(-1, 1, n) * rem
    ok = (np.hypot(dk, de) > 0) & (np.hypot(dk, de) <= r)
    kk, ee, ll, xx = l[ok] + dk[ok], xi[ok] + de[ok], l[ok], xi[ok]
    c2 = _rho_lip(kk, ee, ll, xx)
    return [
        _check("equivalence", "upper", c1, {"k": k, "eta": eta},
               lambda w: float(_rho_equiv(w["k"], w["eta"])), "rho", ceil),
        _check("lipschitz", "upper", c2, {"k": kk, "eta": ee, "l": ll, "xi": xx},
               lambda w: float(_rho_lip(w["k"], w["eta"], w["l"], w["xi"])), "rho", ceil),
    ]


# -- suite "3.2" ------------------------------------------------------------------------

def _index_at(t, a):
    """Resonant index n with t in I_{n, a} (0 if t is outside the window)."""
    a = np.asarray(a, dtype=float)
    E = _capital_e_arr(np.maximum(a, 3.0))
    with np.errstate(divide="ignore"):
        n = np.floor((2 * a / t + 1) / 2)
    inside = (a >= 3) & (t >= 2 * a / (2 * E + 1)) & (t <= 2 * a)
    return np.where(inside, np.clip(n, 1, E), 0).astype(np.int64)


def _sep_eval(eta, xi, alpha, t, k, n):
    """(a, b, c-constant) for one configuration; c-constant = |eta - xi| |n| / |eta|."""
    a_holds = k == n
    b_holds = (np.abs(t - eta / k) >= eta / (10 * alpha * k**2)) & (np.abs(t - xi / n) >= xi / (10 * alpha * n**2))
    cst = np.abs(eta - xi) * n / eta
    return a_holds, b_holds, cst


def _suite_32(budget, rng, ceil):
    n = budget
    alpha = rng.choice([1.0, 2.0, 4.0], n)
    eta = np.exp(rng.uniform(math.log(3), math.log(1e4), n))
    xi = eta * alpha ** rng.uniform(-1, 1, n)
    E = _capital_e_arr(eta)
    k = np.floor(rng.uniform(0, 1, n) * E).astype(np.int64) + 1
    lo, hi = 2 * eta / (2 * k + 1), 2 * eta / (2 * k - 1)
    mode = rng.integers(0, 5, n)
    t = np.select(
        [mode == 0, mode == 1, mode == 2, mode == 3],
        [eta / k, lo, hi, eta / k + np.sign(rng.uniform(-1, 1, n)) * eta / (10 * alpha * k**2)],
        rng.uniform(lo, hi),
    )
    # adversarial: put xi so that t sits at a neighbour's critical time
    adv = rng.uniform(size=n) < 0.3
    kn = np.maximum(1, k + rng.choice([-1, 1], n))
    xi = np.where(adv, np.clip(kn * t * (1 + rng.uniform(-0.05, 0.05, n)), eta / alpha, eta * alpha), xi)
    nn = _index_at(t, xi)
    kk = _index_at(t, eta)
    ok = (nn >= 1) & (kk >= 1)
    eta, xi, alpha, t, kk, nn = eta[ok], xi[ok], alpha[ok], t[ok], kk[ok], nn[ok]
    a_h, b_h, cst = _sep_eval(eta, xi, alpha, t, kk.astype(float), nn.astype(float))
    ratio = np.maximum(kk / nn, nn / kk).astype(float)
    neither = ~a_h & ~b_h
    cols = {"eta": eta, "xi": xi, "alpha": alpha, "t": t, "k": kk, "n": nn}

    def ev_ratio(w):
        return max(w["k"] / w["n"], w["n"] / w["k"])

    def ev_c(w):
        return float(_sep_eval(w["eta"], w["xi"], w["alpha"], w["t"], w["k"], w["n"])[2])

    checks = [
        _check("k_over_n", "upper", ratio, cols, ev_ratio, "3.2", ceil),
        _check("branch_c", "lower", cst[neither], {c: v[neither] for c, v in cols.items()}, ev_c, "3.2", ceil,
               note="min |eta - xi| |n| / |eta| over samples where neither (a) nor (b) holds"),
    ]
    return checks, {"samples_neither_ab": int(neither.sum()), "samples_a": int(a_h.sum()),
                    "samples_b_only": int((~a_h & b_h).sum())}


# -- total growth --------------------------------------------------------------------

def scan_grid():
    """The standard (nu, eta) scan: nu in [1e-6, 1e-2], eta in [3, 1e5], both log-spaced."""
    nus = np.logspace(-6, -2, 9)
    etas = np.unique(np.round(np.logspace(math.log10(3), 5, 400), 9))
    return nus, etas


def _suite_total_growth(budget, rng, ceil):
    from .toy import total_growth_scan

    nus, etas = scan_grid()
    table = total_growth_scan([(nu, 0.5) for nu in nus], etas)
    per_nu = {float(nu): float(np.exp(table.log_total[table.nu == nu].max())) for nu in nus}
    i = int(np.argmax(table.log_total))
    sup_w = float(np.exp(table.log_total[i]))
    regc = table.regime_constants()
    # pointwise w >= 1 and monotonicity in t on random samples
    m = max(budget, 1)
    eta = np.sign(rng.uniform(-1, 1, m)) * np.exp(rng.uniform(0, math.log(1e5), m))
    t = rng.uniform(0, 1, m) * 3 * np.abs(eta)
    nu = np.exp(rng.uniform(math.log(1e-6), math.log(1e-2), m))
    beta = rng.choice([0.25, 0.5], m)
    lw = np.empty(m)
    lw2 = np.empty(m)
    dt = rng.uniform(0, 1, m) * np.abs(eta) * 0.1
    # the kernel takes scalar nu, so group samples into nu bins (values are used exactly)
    order = np.argsort(nu)
    for chunk in np.array_split(order, 256):
        if chunk.size == 0:
            continue
        nu_c = float(nu[chunk[0]])
        nu[chunk] = nu_c
        for b in (0.25, 0.5):
            sel = chunk[beta[chunk] == b]
            if sel.size:
                lw[sel] = kernels.log_weight(t[sel], eta[sel], nu_c, b)[0]
                lw2[sel] = kernels.log_weight(t[sel] + dt[sel], eta[sel], nu_c, b)[0]
    w = np.exp(lw)
    mono = np.exp(lw2 - lw)
    cols = {"t": t, "eta": eta, "nu": nu, "beta": beta}

    def ev_w(wt):
        return float(np.exp(kernels.log_weight(wt["t"], wt["eta"], wt["nu"], wt["beta"])[0]))

    def ev_sup(wt):
        from .toy import log_total_growth
        return math.exp(log_total_growth(wt["eta"], wt["nu"], 0.5))

    reg_names = {"low": "low_regime", "middle": "middle_regime", "high": "high_regime"}
    checks = [
        _check("sup_w", "upper", np.array([sup_w]), {"eta": np.array([table.eta[i]]), "nu": np.array([table.nu[i]])},
               ev_sup, "total-growth", ceil),
        _check("w_lower", "lower", w, cols, ev_w, "total-growth", ceil, note="w >= 1"),
        _check("monotone", "lower", mono, dict(cols, dt=dt),
               lambda wt: float(np.exp(kernels.log_weight(wt["t"] + wt["dt"], wt["eta"], wt["nu"], wt["beta"])[0]
                                       - kernels.log_weight(wt["t"], wt["eta"], wt["nu"], wt["beta"])[0])),
               "total-growth", ceil, note="w(t + dt) / w(t)"),
    ]
    for reg, name in reg_names.items():
        sel = np.array(table.regime) == reg
        x = np.cbrt(table.nu) * np.abs(table.eta)
        scale = {"low": x, "middle": np.ones_like(x),
                 "high": (np.cbrt(table.nu) * np.sqrt(np.abs(table.eta))) ** (-table.beta)}[reg]
        vals = table.log_total[sel] / scale[sel]

        def ev_reg(wt, reg=reg):
            from .toy import log_total_growth
            x = np.cbrt(wt["nu"]) * abs(wt["eta"])
            s = {"low": x, "middle": 1.0, "high": (np.cbrt(wt["nu"]) * math.sqrt(abs(wt["eta"]))) ** -0.5}[reg]
            return log_total_growth(wt["eta"], wt["nu"], 0.5) / s

        checks.append(_check(name, "upper", vals, {"eta": table.eta[sel], "nu": table.nu[sel]}, ev_reg,
                             "total-growth", ceil))
    return checks, {"sup_w_per_nu": per_nu, "regime_constants": regc}


# -- D-D --------------------------------------------------------------------------------

def _dd_ratio(t, eta, xi, nu):
    p = WeightParams(nu)
    return D_mult(t, xi, p) / D_mult(t, eta, p) / japanese(eta - xi) ** 3


def _dd_lower(t, eta, nu):
    p = WeightParams(nu)
    return D_mult(t, eta, p) / (nu * np.maximum(np.abs(eta) ** 3, t**3))


def _suite_dd(budget, rng, ceil):
    # exhaustive lower bound on the lattice t in [1, 1000], |eta| <= 1000, nu in the scan set
    ts = np.concatenate([np.linspace(1, 1000, 400), 2 * np.arange(1, 501, dtype=float)])
    es = np.concatenate([np.linspace(-1000, 1000, 2001), np.linspace(-1, 1, 201)])
    T, Et = np.meshgrid(ts, es, indexing="ij")
    lows, cols_t, cols_e, cols_n = [], [], [], []
    for nu in np.logspace(-6, -2, 5):
        lows.append(_dd_lower(T, Et, nu).ravel())
        cols_t.append(T.ravel())
        cols_e.append(Et.ravel())
        cols_n.append(np.full(T.size, nu))
    low = np.concatenate(lows)
    low_cols = {"t": np.concatenate(cols_t), "eta": np.concatenate(cols_e), "nu": np.concatenate(cols_n)}
    n = budget
    t = 1 + np.exp(rng.uniform(0, math.log(1e3), n)) - 1
    eta = rng.uniform(-1, 1, n) * np.exp(rng.uniform(0, math.log(1e3), n))
    xi = eta + rng.uniform(-1, 1, n) * np.exp(rng.uniform(math.log(1e-3), math.log(1e3), n))
    nu = float(rng.choice(np.logspace(-6, -2, 5)))
    ratio = _dd_ratio(t, eta, xi, nu)
    cols = {"t": t, "eta": eta, "xi": xi, "nu": np.full(n, nu)}
    return [
        _check("lower", "lower", low, low_cols, lambda w: float(_dd_lower(w["t"], w["eta"], w["nu"])), "D-D", ceil,
               note="D / (nu max(|eta|^3, t^3)), exhaustive lattice"),
        _check("ratio", "upper", ratio, cols, lambda w: float(_dd_ratio(w["t"], w["eta"], w["xi"], w["nu"])),
               "D-D", ceil),
    ]


# -- w-w --------------------------------------------------------------------------------

def _ww_const(t, eta, xi, nu, beta, sign=-1.0):
    """Constant of |w(eta) - w(xi)| <= C |xi - eta| / <eta> * rate(t).

    rate is nu^(-1/3) for t <= nu^(-1/3) and nu^(sign beta / 3) t^(1 - beta) beyond.
    sign = -1 is the exponent that joins the two branches continuously at t = nu^(-1/3);
    sign = +1 is the literal published exponent.
    """
    lw1 = kernels.log_weight(t, eta, nu, beta)[0]
    lw2 = kernels.log_weight(t, xi, nu, beta)[0]
    diff = np.abs(np.exp(lw1) - np.exp(lw2))
    nu3 = nu ** (1 / 3)
    bound = np.where(t <= 1 / nu3, 1 / nu3, nu3 ** (sign * beta) * t ** (1 - beta))
    return diff / (np.abs(xi - eta) / japanese(eta) * bound)


def _straddles(eta, xi):
    a, b = np.abs(eta), np.abs(xi)
    ea = np.where(a >= 3, _capital_e_arr(np.maximum(a, 3)), 0)
    eb = np.where(b >= 3, _capital_e_arr(np.maximum(b, 3)), 0)
    return ea != eb


def _suite_ww(budget, rng, ceil):
    n = budget
    nu_set = np.logspace(-6, -2, 5)
    nus = rng.choice(nu_set, n)
    beta = rng.choice([0.25, 0.5], n)
    eta = np.sign(rng.uniform(-1, 1, n)) * np.exp(rng.uniform(math.log(3), math.log(1e5), n))
    delta = np.where(rng.uniform(size=n) < 0.2, rng.choice([-0.1, 0.1], n), rng.uniform(-0.1, 0.1, n))
    xi = eta * (1 + delta)
    a = np.abs(eta)
    E = _capital_e_arr(np.maximum(a, 3))
    j = np.floor(rng.uniform(0, 1, n) * E) + 1
    mode = rng.integers(0, 4, n)
    t = np.select([mode == 0, mode == 1, mode == 2], [a / j, 2 * a / (2 * j + 1), 2 * a],
                  rng.uniform(0, 1, n) * 3 * a)
    c = np.empty(n)
    c_lit = np.empty(n)
    for nu in nu_set:
        for b in (0.25, 0.5):
            sel = (nus == nu) & (beta == b)
            if np.any(sel):
                c[sel] = _ww_const(t[sel], eta[sel], xi[sel], float(nu), float(b))
                c_lit[sel] = _ww_const(t[sel], eta[sel], xi[sel], float(nu), float(b), sign=1.0)
    str_ = _straddles(eta, xi)
    cols = {"t": t, "eta": eta, "xi": xi, "nu": nus, "beta": beta}

    def ev(w, sign=-1.0):
        return float(_ww_const(np.array([w["t"]]), np.array([w["eta"]]), np.array([w["xi"]]), w["nu"], w["beta"],
                               sign)[0])

    def jump(w):
        # log-jump of w across the threshold |eta| = (2E + 1) E: the full factor G_E
        from .multipliers import log_G
        E = int(w["E"])
        return log_G(E, (2 * E + 1) * E * (1 + 1e-12), WeightParams(w["nu"], w["beta"]))

    Es = np.arange(1, 224)
    jumps, jn, jb, jE = [], [], [], []
    for nu in nu_set:
        for b in (0.25, 0.5):
            for E_ in Es:
                jumps.append(jump({"E": E_, "nu": nu, "beta": b}))
                jn.append(nu)
                jb.append(b)
                jE.append(E_)
    return [
        _check("lipschitz", "upper", c[~str_], {k: v[~str_] for k, v in cols.items()}, ev, "w-w", ceil,
               note="pairs within one E-band; w jumps across |eta| = (2E+1)E"),
        _check("lipschitz_literal", "upper", c_lit[~str_], {k: v[~str_] for k, v in cols.items()},
               lambda w: ev(w, 1.0), "w-w", ceil, note="late-time rate nu^(beta/3) t^(1-beta)"),
        _check("threshold_jump", "upper", np.array(jumps),
               {"E": np.array(jE), "nu": np.array(jn), "beta": np.array(jb)}, jump, "w-w", ceil,
               note="log w jump across an E-threshold (reported, not part of the lemma)"),
    ], {"straddling_samples": int(str_.sum()),
        "straddling_max_constant": float(np.max(c[str_])) if np.any(str_) else 0.0}


# -- function-space lemmas ---------------------------------------------------------------

_FS_GRID = Grid(16, 128, Lv=8 * math.pi)


def _random_field(grid: Grid, rng, band: float = 4.0) -> SpectralField:
    K, ETA = grid.K, grid.ETA
    width = rng.uniform(0.5, 2.0)
    c = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    c *= (np.abs(K) <= band) & (np.abs(ETA) <= band)
    c *= np.exp(-(K**2 + ETA**2) / (2 * (width * band / 2) ** 2))
    vals = values_from_coeffs(grid, c, check_real=False)
    return dealias(SpectralField(grid, coeffs_from_values(grid, vals)))


def _hs(c, grid, g):
    return float(np.sqrt(np.sum(grid.bracket ** (2 * g) * np.abs(c) ** 2)))


def _phys(grid, c):
    return values_from_coeffs(grid, c, check_real=False)


def _spec(grid, v):
    return coeffs_from_values(grid, v)


def _product_constants(seed: int, index: int, t: float, nu: float = 1e-2, gamma: float = 2.0):
    grid = _FS_GRID
    rng = np.random.default_rng([seed, index])
    q1, q2 = _random_field(grid, rng).coeffs, _random_field(grid, rng).coeffs
    D = D_mult(t, grid.ETA, WeightParams(nu))
    p1, p2 = _phys(grid, q1), _phys(grid, q2)
    prod = _spec(grid, p1 * p2)
    c1 = _hs(D * prod, grid, gamma) / (_hs(q1, grid, gamma + 3) * _hs(D * q2, grid, gamma))
    K, ETA = grid.K, grid.ETA
    # grad^perp q1 . grad q2 = -d_v q1 d_z q2 + d_z q1 d_v q2
    tr = _spec(grid, -_phys(grid, 1j * ETA * q1) * _phys(grid, 1j * K * q2)
               + _phys(grid, 1j * K * q1) * _phys(grid, 1j * ETA * q2))
    c2 = _hs(D * tr, grid, gamma) / (_hs(q1, grid, gamma + 5) * _hs(D * q2, grid, gamma)
                                       + _hs(D * q1, grid, gamma) * _hs(q2, grid, gamma + 5))
    return c1, c2


def _commutator_constant(seed: int, index: int, s: float):
    grid = _FS_GRID
    rng = np.random.default_rng([seed, index])
    f, g = _random_field(grid, rng).coeffs, _random_field(grid, rng).coeffs
    J = grid.bracket
    pf, pg = _phys(grid, f), _phys(grid, g)
    lhs = _spec(grid, pf * pg)
    lhs = J**s * lhs - _spec(grid, pf * _phys(grid, J**s * g))
    grad_f = np.sqrt(_phys(grid, 1j * grid.K * f) ** 2 + _phys(grid, 1j * grid.ETA * f) ** 2)
    l2 = lambda c: float(np.sqrt(np.sum(np.abs(c) ** 2)))  # noqa: E731
    rhs = np.max(grad_f) * l2(J ** (s - 1) * g) + l2(J**s * f) * np.max(np.abs(pg))
    return l2(lhs) / rhs


def composition_map(grid: Grid = _FS_GRID, t: float = 2.0, amp: float = 0.05):
    """Fixed coordinate map G(z, y) = (z - Phi(y), y + Phi(y)/t) with a small Phi."""
    from .coords import build_coordinates
    from .spectral import profile_coeffs

    q = 2 * grid.deta
    phi_hat = profile_coeffs(grid, amp * t * np.sin(q * grid.v))
    return build_coordinates(t, phi_hat, SpectralField.zeros(grid))


def _composition_constant(seed: int, index: int, gamma: float = 2.0):
    from .coords import remap_from_moving_frame

    grid = _FS_GRID
    rng = np.random.default_rng([seed, index])
    F = _random_field(grid, rng)
    FG = remap_from_moving_frame(F, composition_map(grid))
    return _hs(FG.coeffs, grid, gamma) / _hs(F.coeffs, grid, gamma)


def _suite_product(budget, rng, ceil, seed):
    idx = np.arange(budget)
    ts = np.array([1.0, 5.0, 20.0])[idx % 3]
    vals = np.array([_product_constants(seed, int(i), float(t)) for i, t in zip(idx, ts)])
    cols = {"seed": np.full(budget, seed), "index": idx, "t": ts}
    return [
        _check("D_product", "upper", vals[:, 0], cols,
               lambda w: _product_constants(int(w["seed"]), int(w["index"]), w["t"])[0], "product", ceil),
        _check("D_transport", "upper", vals[:, 1], cols,
               lambda w: _product_constants(int(w["seed"]), int(w["index"]), w["t"])[1], "product", ceil),
    ]


def _suite_commutator(budget, rng, ceil, seed):
    idx = np.arange(budget)
    ss = np.array([1.0, 2.0, 3.0])[idx % 3]
    vals = np.array([_commutator_constant(seed, int(i), float(s)) for i, s in zip(idx, ss)])
    cols = {"seed": np.full(budget, seed), "index": idx, "s": ss}
    return [_check("kato_ponce", "upper", vals, cols,
                   lambda w: _commutator_constant(int(w["seed"]), int(w["index"]), w["s"]), "commutator", ceil)]


def _suite_composition(budget, rng, ceil, seed):
    idx = np.arange(budget)
    vals = np.array([_composition_constant(seed, int(i)) for i in idx])
    cmap = composition_map()
    grad = float(np.max(np.abs(np.gradient(cmap.Phi_of_y, _FS_GRID.v)) * (1 + 1 / cmap.t)))
    cols = {"seed": np.full(budget, seed), "index": idx}
    return [_check("H2_bound", "upper", vals, cols,
                   lambda w: _composition_constant(int(w["seed"]), int(w["index"])), "composition", ceil)], \
        {"grad_G_minus_I_sup": grad}


SUITES = {
    "rho": (_suite_rho, 200_000),
    "3.2": (_suite_32, 200_000),
    "total-growth": (_suite_total_growth, 1_000_000),
    "D-D": (_suite_dd, 1_000_000),
    "w-w": (_suite_ww, 200_000),
    "product": (_suite_product, 60),
    "commutator": (_suite_commutator, 60),
    "composition": (_suite_composition, 100),
}
_SEEDED = {"product", "commutator", "composition"}


def run_suite(lemma_id: str, sample_budget: int | None = None, seed: int = 0) -> LemmaSuiteResult:
    if lemma_id not in SUITES:
        raise KeyError(f"unknown lemma {lemma_id!r}; choose from {sorted(SUITES)}")
    fn, default = SUITES[lemma_id]
    budget = int(sample_budget or default)
    rng = np.random.default_rng(seed)
    ceil = load_ceilings()["lemmas"]
    out = fn(budget, rng, ceil, seed) if lemma_id in _SEEDED else fn(budget, rng, ceil)
    checks, info = out if isinstance(out, tuple) else (out, {})
    return LemmaSuiteResult(lemma_id, seed, checks, info)
