"""Command line entry point: ``couette-lab <subcommand> [options]``."""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import load_config, section, sim_config_from, grid_from
from .errors import ConfigError, CouetteLabError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
OUT_ENV = "COUETTE_LAB_OUT"


class Outputs:
    """Writes files under one directory and a manifest of their hashes."""

    def __init__(self, root: str, command: str, seed: int, config_text: str):
        self.root = root
        self.command = command
        self.seed = seed
        self.config_text = config_text
        self.files: dict[str, str] = {}
        self.timings: dict[str, float] = {}
        os.makedirs(root, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        data = text.encode("utf-8")
        with open(os.path.join(self.root, name), "wb") as fh:
            fh.write(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def write_json(self, name: str, obj) -> None:
        self.write(name, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def finish(self) -> None:
        manifest = {
            "command": self.command, "seed": self.seed, "version": __version__,
            "config_sha256": hashlib.sha256(self.config_text.encode("utf-8")).hexdigest(),
            "files": dict(sorted(self.files.items())),
        }
        with open(os.path.join(self.root, "manifest.json"), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        # wall-clock data is not reproducible, so it stays out of the manifest
        with open(os.path.join(self.root, "timings.json"), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.timings, indent=2, sort_keys=True) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _table(header: list[str], rows, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _bootstrap_csv(series) -> str:
    names = list(series)
    t = next(iter(series.values())).t if series else np.zeros(0)
    rows = [[float(t[i])] + [float(series[n].ratio[i]) for n in names] for i in range(t.size)]
    return _table(["t"] + names, rows, "bootstrap ratios LHS / RHS; values >= 1 are violations")


# -- subcommands ----------------------------------------------------------------------

def cmd_linear(args, doc, out: Outputs) -> int:
    from .initial import make_initial
    from .linear import LinearSolution, envelope_check

    lin = section(doc, "linear")
    run = section(doc, "run")
    grid = grid_from(doc)
    nus = [float(x) for x in lin.get("nus", [0.0, 1e-3, 1e-2])]
    t_grid = np.linspace(0.0, float(lin.get("t_end", 100.0)), int(lin.get("n_times", 201)))
    window = tuple(float(x) for x in lin.get("slope_window", [10.0, 100.0]))
    f0 = make_initial(grid, run.get("preset", "gaussian_bump"), float(run.get("amplitude", 1.0)),
                      float(run.get("sigma", 12.0)), args.seed)
    series, summary = [], []
    for nu in nus:
        rep = envelope_check(LinearSolution(f0, nu), t_grid, window)
        for i, t in enumerate(rep.t):
            series.append([nu, float(t), float(rep.dx_psi[i]), float(rep.dy_psi[i]), float(rep.omega[i]),
                           float(rep.inviscid[i])])
        summary.append([nu, rep.C_id, rep.c_id, rep.C_ed, rep.c_ed, rep.slope_dx, rep.slope_dy])
        print(f"nu={nu:g}: slope dx psi {rep.slope_dx:.4f}, dy psi {rep.slope_dy:.4f}, "
              f"C_ed {rep.C_ed:.4g}, c_ed {rep.c_ed:.4g}")
    out.write("linear.csv", _table(["nu", "t", "dx_psi", "dy_psi", "omega_neq", "inviscid"], series,
                                   "exact linear solution, sheared frame"))
    out.write("envelope.csv", _table(["nu", "C_id", "c_id", "C_ed", "c_ed", "slope_dx", "slope_dy"], summary,
                                     f"slopes fitted over t in [{window[0]:g}, {window[1]:g}]"))
    return EXIT_OK


def _simulate(args, doc):
    from .solver import simulate

    cfg = sim_config_from(doc, args.seed, nu=getattr(args, "nu", None), amplitude=getattr(args, "amplitude", None),
                          t_end=getattr(args, "t_end", None))
    return cfg, simulate(cfg)


def _meta(cfg, trace) -> dict:
    return {"nu": cfg.nu, "epsilon": cfg.epsilon, "sigma": cfg.sigma, "ceiling": cfg.ceiling,
            "classification": trace.classification, "events": trace.events, "summary": trace.summary,
            "grid": [cfg.grid.Kmax, cfg.grid.Nv, cfg.grid.Lv], "seed": cfg.seed}


def cmd_simulate(args, doc, out: Outputs) -> int:
    from .diagnostics import bootstrap_monitor

    cfg, trace = _simulate(args, doc)
    meta = _meta(cfg, trace)
    out.write("trace.csv", "# meta: " + json.dumps(meta, sort_keys=True, default=_jsonable) + "\n" + trace.to_csv())
    out.write("bootstrap.csv", _bootstrap_csv(bootstrap_monitor(trace, cfg.epsilon, cfg.nu)))
    out.write_json("summary.json", meta)
    print(f"classification: {trace.classification}; sup ||f||/||f0|| = {trace.summary.get('sup_f_ratio', 0):.6g}")
    for ev in trace.events:
        print(f"event {ev['kind']} at t={ev['t']:.6g}: {ev['message']}")
    return EXIT_OK


def cmd_report(args, doc, out: Outputs) -> int:
    from .diagnostics import bootstrap_monitor, read_trace_csv, theorem_report

    if args.trace is None:
        raise ConfigError("report needs --trace <trace.csv> written by `simulate`")
    try:
        with open(args.trace, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read trace {args.trace}: {exc.strerror}") from None
    first = text.splitlines()[0] if text else ""
    if not first.startswith("# meta: "):
        raise ConfigError(f"{args.trace}: line 1: missing '# meta:' header")
    meta = json.loads(first[len("# meta: "):])
    trace = read_trace_csv(text)
    boot = bootstrap_monitor(trace, meta["epsilon"], meta["nu"])
    rep = theorem_report(trace, meta["nu"], meta["sigma"])
    out.write("bootstrap.csv", _bootstrap_csv(boot))
    lines = [f"classification: {meta['classification']}"]
    lines.append(f"sup stability ratio: {rep.sup_stability_ratio:.6g}")
    lines.append(f"enhanced dissipation C: sup {rep.C_ed_sup:.6g}, fit {rep.C_ed_fit:.6g}")
    lines.append(f"inviscid damping C: sup {rep.C_id_sup:.6g}, fit {rep.C_id_fit:.6g}")
    for name, b in boot.items():
        viol = b.first_violation
        lines.append(f"bootstrap {name}: max ratio {b.max_ratio:.6g}"
                     + (f", first violation at t={viol:.6g}" if viol is not None else ""))
    for name, ok in rep.checks.items():
        lines.append(f"check {name}: {'PASS' if ok else 'FAIL'}")
    text_out = "\n".join(lines) + "\n"
    out.write("report.txt", text_out)
    sys.stdout.write(text_out)
    ok = (meta["classification"] == "stable" and rep.passed() and all(b.max_ratio < 1 for b in boot.values()))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_coords(args, doc, out: Outputs) -> int:
    from .coords import aux_fields, remap_to_moving_frame, solve_delta_t

    cfg, trace = _simulate(args, doc)
    if trace.tracker is None or trace.final_state.t < 1.0:
        raise ConfigError("coords needs [run] track_coordinates = true and t_end >= 1")
    f_s = trace.final_state.omega_sheared_hat
    cs = trace.tracker.state(f_s)
    aux = aux_fields(cs)
    grid = cfg.grid
    rows = [[float(grid.v[i]), float(cs.v_of_y[i]), float(cs.Phi_of_y[i]), float(cs.vprime[i]),
             float(aux["g"][i]), float(aux["h"][i]), float(aux["hbar"][i])] for i in range(grid.Nv)]
    out.write("coords.csv", _table(["y", "v", "Phi", "vprime", "g", "h", "hbar"], rows,
                                   f"moving-frame coordinates at t={cs.t:.17g}; g, h, hbar on the V grid"))
    res = solve_delta_t(remap_to_moving_frame(f_s, cs), cs)
    summary = {"t": cs.t, "vprime_min": float(np.min(cs.vprime)), "elliptic_iterations": res.iterations,
               "elliptic_residual": res.residual, "elliptic_contraction": res.contraction,
               "classification": trace.classification}
    out.write_json("coords_summary.json", summary)
    print(json.dumps(summary, sort_keys=True, default=_jsonable))
    return EXIT_OK


def cmd_toy(args, doc, out: Outputs) -> int:
    from .multipliers import ResonanceIndex, WeightParams, growth_factor_g
    from .toy import ToyState, integrate_toy_pair, toy_divergence, total_growth_scan

    toy = section(doc, "toy")
    nu = float(toy.get("nu", 1e-3))
    eta = float(toy.get("eta", 12.0))
    beta = float(toy.get("beta", 0.5))
    m = int(toy.get("m", 2))
    kappa = float(toy.get("kappa", nu ** (1 / 3)))
    n_steps = int(toy.get("n_steps", 4000))
    params = WeightParams(nu, beta)
    st = ToyState(1.0, 1.0, m, eta, kappa, nu, beta)
    span = ResonanceIndex(m, eta).interval
    pair = integrate_toy_pair(st, span, "pair", n_steps)
    red = integrate_toy_pair(st, span, "reduced", n_steps)
    g0 = growth_factor_g(m, eta, span[0] - eta / m, params)
    closed = growth_factor_g(m, eta, red.t - eta / m, params) / g0
    rows = [[float(pair.t[i]), abs(pair.f_m[i]), abs(pair.f_mpm1[i]), abs(red.f_mpm1[i]), float(closed[i])]
            for i in range(pair.t.size)]
    out.write("toy.csv", _table(["t", "pair_f_m", "pair_f_mpm1", "reduced_f_mpm1", "closed_form"], rows,
                                f"m={m} eta={eta:g} nu={nu:g} beta={beta:g} kappa={kappa:g}"))
    etas = np.asarray(toy.get("etas", np.unique(np.round(np.logspace(math.log10(3), 5, 400), 9))), dtype=float)
    scan = total_growth_scan([(float(n), beta) for n in np.logspace(-6, -2, 9)], etas)
    out.write("growth.csv", _table(["nu", "beta", "eta", "E", "log_total", "regime"],
                                   ([r["nu"], r["beta"], r["eta"], r["E"], r["log_total"], r["regime"]]
                                    for r in scan.rows())))
    summary = {"reduced_vs_closed_max_rel": float(np.max(np.abs(np.abs(red.f_mpm1) - closed) / closed)),
               "divergence": toy_divergence(st, n_steps), "sup_total_growth": scan.sup,
               "regime_constants": scan.regime_constants()}
    out.write_json("toy_summary.json", summary)
    print(json.dumps(summary, sort_keys=True, default=_jsonable))
    return EXIT_OK


def cmd_verify(args, doc, out: Outputs) -> int:
    from .lemmas import SUITES, run_suite

    lem = section(doc, "lemmas")
    names = args.lemma or lem.get("names") or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown lemma(s) {unknown}; choose from {sorted(SUITES)}")
    budget = args.budget or lem.get("budget")
    ok = True
    for name in names:
        t0 = time.perf_counter()
        res = run_suite(name, budget, args.seed)
        out.timings[f"lemma {name}"] = time.perf_counter() - t0
        out.write(f"lemma_{name}.csv", res.to_csv())
        out.write(f"lemma_{name}_witness.json", res.witness_json())
        for c in res.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {name}/{c.name}: worst {c.worst:.6g} "
                  f"({'<=' if c.kind == 'upper' else '>='} {c.bound:.6g}) over {c.samples} samples")
            if not c.passed:
                print(f"  witness: {json.dumps(c.witness, sort_keys=True)}")
        ok &= res.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(args, doc, out: Outputs) -> int:
    from .sweep import SimClassifier, SweepSpec, stub_classifier, sweep

    sw = section(doc, "sweep")
    try:
        spec = SweepSpec(tuple(float(x) for x in sw.get("nus", [1e-3, 1e-2])), float(sw.get("amp_lo", 1e-4)),
                         float(sw.get("amp_hi", 1e-1)), float(sw.get("rtol", 0.1)), int(sw.get("max_iter", 40)),
                         seed=args.seed)
    except ValueError as exc:
        raise ConfigError(f"invalid [sweep] section: {exc}") from None
    stub = args.stub or bool(sw.get("stub", False))
    classifier = stub_classifier if stub else SimClassifier(sim_config_from(doc, args.seed))
    workers = int(args.threads or sw.get("workers", 1))
    rep = sweep(spec, classifier, workers=workers)
    out.write("sweep.csv", rep.to_csv())
    out.write("sweep_summary.txt", rep.summary())
    for r in rep.timings():
        out.timings[f"cell nu={r['nu']:.6g} amplitude={r['amplitude']:.6g}"] = r["runtime"]
    sys.stdout.write(rep.summary())
    return EXIT_OK


COMMANDS = {
    "linear": (cmd_linear, "exact linear evolution and damping envelopes"),
    "simulate": (cmd_simulate, "nonlinear run with diagnostics trace"),
    "coords": (cmd_coords, "moving-frame coordinates and elliptic solve at t_end"),
    "report": (cmd_report, "bootstrap and envelope report for a stored trace"),
    "toy": (cmd_toy, "echo toy model and total-growth scan"),
    "verify-lemmas": (cmd_verify, "sampled lemma suites against pinned ceilings"),
    "sweep": (cmd_sweep, "critical-amplitude bisection and exponent fit"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./couette-lab-out)")
    common.add_argument("--seed", type=int, default=None, help="random seed (overrides the config)")
    common.add_argument("--threads", type=int, default=None, help="FFT threads / sweep workers")
    p = argparse.ArgumentParser(prog="couette-lab", description="Spectral laboratory for 2D Couette flow stability.")
    p.add_argument("--version", action="version", version=f"couette-lab {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_)
        if name in ("simulate", "coords"):
            sp.add_argument("--nu", type=float)
            sp.add_argument("--amplitude", type=float)
            sp.add_argument("--t-end", dest="t_end", type=float)
        if name == "report":
            sp.add_argument("--trace", help="trace.csv written by `simulate`")
        if name == "verify-lemmas":
            sp.add_argument("--lemma", action="append", help="suite id (repeatable; default all)")
            sp.add_argument("--budget", type=int, help="sample budget per suite")
        if name == "sweep":
            sp.add_argument("--stub", action="store_true", help="use the synthetic nu^(1/3) classifier")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        doc = load_config(args.config)
        if args.seed is None:
            args.seed = int(doc.get("seed", 0))
        if args.threads:
            from .spectral import set_fft_workers
            set_fft_workers(args.threads)
        root = args.out or os.environ.get(OUT_ENV) or "couette-lab-out"
        out = Outputs(root, args.command, args.seed, doc.get("_text", ""))
        t0 = time.perf_counter()
        code = COMMANDS[args.command][0](args, doc, out)
        out.timings["total"] = time.perf_counter() - t0
        out.finish()
        return code
    except ConfigError as exc:
        print(f"couette-lab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CouetteLabError as exc:
        print(f"couette-lab: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
