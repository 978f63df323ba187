"""(nu, amplitude) threshold sweep: per-nu bisection of the critical amplitude and the fitted exponent."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .solver import SimConfig, simulate

SWEEP_SCHEMA = "couette-lab-sweep/1"


@dataclass(frozen=True)
class CellResult:
    classification: str  # stable | unstable | inconclusive
    sup_energy_ratio: float
    fitted_envelope_C: float
    message: str = ""


@dataclass(frozen=True)
class SweepRow:
    nu: float
    amplitude: float
    beta_amp_used: float
    classification: str
    sup_energy_ratio: float
    fitted_envelope_C: float
    runtime: float


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)
    critical: dict[float, float | None] = field(default_factory=dict)
    bracket: dict[float, tuple[float | None, float | None]] = field(default_factory=dict)
    gamma: float | None = None
    gamma_note: str = ""

    def to_csv(self) -> str:
        """Deterministic table (runtimes are kept out; see :meth:`timings`)."""
        buf = io.StringIO()
        buf.write(f"# schema: {SWEEP_SCHEMA}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nu", "amplitude", "beta_amp_used", "classification", "sup_energy_ratio", "fitted_envelope_C"])
        for r in self.rows:
            w.writerow([format(r.nu, ".17g"), format(r.amplitude, ".17g"), format(r.beta_amp_used, ".17g"),
                        r.classification, format(r.sup_energy_ratio, ".17g"), format(r.fitted_envelope_C, ".17g")])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"# schema: {SWEEP_SCHEMA}"]
        for nu in sorted(self.critical):
            lo, hi = self.bracket[nu]
            crit = self.critical[nu]
            lines.append(f"nu={nu:.6g} stable<={_fmt(lo)} unstable>={_fmt(hi)} critical={_fmt(crit)}")
        lines.append(f"gamma={_fmt(self.gamma)}" + (f" ({self.gamma_note})" if self.gamma_note else ""))
        return "\n".join(lines) + "\n"

    def timings(self) -> list[dict]:
        return [{"nu": r.nu, "amplitude": r.amplitude, "runtime": r.runtime} for r in self.rows]


def _fmt(x):
    return "undefined" if x is None else format(x, ".6g")


# -- classifiers ----------------------------------------------------------------------

def stub_classifier(nu: float, amplitude: float, seed: int = 0) -> CellResult:
    """Synthetic oracle: stable exactly below amplitude nu^(1/3)."""
    stable = amplitude < nu ** (1.0 / 3.0)
    return CellResult("stable" if stable else "unstable", 1.0 if stable else math.inf, 0.0)


@dataclass(frozen=True)
class SimClassifier:
    """Classify by running :func:`simulate` on ``base`` with the cell's (nu, amplitude)."""

    base: SimConfig

    def __call__(self, nu: float, amplitude: float, seed: int = 0) -> CellResult:
        from .diagnostics import theorem_report

        cfg = replace(self.base, nu=nu, amplitude=amplitude, beta_amp=0.0, seed=seed)
        trace = simulate(cfg)
        ratio = float(trace.summary.get("sup_f_ratio", math.nan))
        cls = trace.classification
        if cls == "stable" and not ratio <= cfg.ceiling:
            cls = "unstable"
        C = theorem_report(trace, nu, cfg.sigma, ceilings={"stability_ratio": math.inf, "C_ed": math.inf,
                                                          "C_id": math.inf}).C_ed_sup
        return CellResult(cls, ratio, C)


def _safe(classifier, nu, amplitude, seed) -> tuple[CellResult, float]:
    t0 = time.perf_counter()
    try:
        res = classifier(nu, amplitude, seed)
    except Exception as exc:  # any cell failure is recorded, never fatal
        res = CellResult("inconclusive", math.nan, math.nan, f"{type(exc).__name__}: {exc}")
    return res, time.perf_counter() - t0


# -- bisection ------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    nus: tuple[float, ...]
    amp_lo: float
    amp_hi: float
    rtol: float = 0.1
    max_iter: int = 40
    expand: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.nus:
            raise ValueError("sweep needs at least one nu")
        if not (0 < self.amp_lo <= self.amp_hi):
            raise ValueError("need 0 < amp_lo <= amp_hi")
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")


def _bisect_one(args) -> tuple[float, list[tuple[float, CellResult, float]], float | None, float | None]:
    """Bisect in log amplitude for one nu. Inconclusive cells count as not stable."""
    nu, spec, classifier = args
    cells: dict[float, tuple[CellResult, float]] = {}

    def ev(a):
        if a not in cells:
            cells[a] = _safe(classifier, nu, a, spec.seed)
        return cells[a][0].classification == "stable"

    lo, hi = spec.amp_lo, spec.amp_hi
    stable_lo = ev(lo)
    if lo == hi:
        out = [(a, *cells[a]) for a in sorted(cells)]
        return nu, out, (lo if stable_lo else None), (None if stable_lo else hi)
    stable_hi = ev(hi)
    for _ in range(spec.expand):
        if stable_lo and not stable_hi:
            break
        if not stable_lo:
            hi, stable_hi = lo, False
            lo /= 4.0
            stable_lo = ev(lo)
        elif stable_hi:
            lo, stable_lo = hi, True
            hi *= 4.0
            stable_hi = ev(hi)
    if not (stable_lo and not stable_hi):
        out = [(a, *cells[a]) for a in sorted(cells)]
        return nu, out, (hi if stable_hi else None), (lo if not stable_lo else None)
    for _ in range(spec.max_iter):
        if hi / lo <= 1 + spec.rtol:
            break
        mid = math.sqrt(lo * hi)
        if ev(mid):
            lo = mid
        else:
            hi = mid
    out = [(a, *cells[a]) for a in sorted(cells)]
    return nu, out, lo, hi


def fit_gamma(critical: dict[float, float | None]) -> tuple[float | None, str]:
    pts = [(nu, a) for nu, a in sorted(critical.items()) if a is not None and a > 0]
    if len({nu for nu, _ in pts}) < 2:
        return None, "needs critical amplitudes at two or more nu values"
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, f"least squares over {len(pts)} nu values"


def sweep(spec: SweepSpec, classifier: Callable[[float, float, int], CellResult] = stub_classifier,
          workers: int = 1, beta_amp_used: float = 0.0) -> SweepReport:
    """Bisect the critical amplitude at every nu (independent tasks) and fit gamma.

    Bisection stops when hi / lo <= 1 + rtol; the critical amplitude is sqrt(lo * hi).
    Result order follows ``spec.nus`` whatever the worker count.
    """
    jobs = [(float(nu), spec, classifier) for nu in spec.nus]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_bisect_one, jobs))
    else:
        results = [_bisect_one(j) for j in jobs]
    rep = SweepReport()
    for nu, cells, lo, hi in results:
        for a, res, rt in cells:
            rep.rows.append(SweepRow(nu, a, beta_amp_used, res.classification, res.sup_energy_ratio,
                                     res.fitted_envelope_C, rt))
        rep.bracket[nu] = (lo, hi)
        rep.critical[nu] = math.sqrt(lo * hi) if lo is not None and hi is not None else None
    rep.gamma, rep.gamma_note = fit_gamma(rep.critical)
    return rep
