import math

import numpy as np
import pytest

from couette_lab import Grid, SimConfig, simulate
from couette_lab.diagnostics import (BOOTSTRAP_NAMES, COLUMNS, EnergyTrace, bootstrap_monitor, ck_w,
                                     read_trace_csv, theorem_report, weighted_coeffs)
from couette_lab.initial import make_initial
from couette_lab.multipliers import WeightParams


@pytest.fixture(scope="module")
def run():
    cfg = SimConfig(Grid(8, 64, Lv=8 * np.pi), 1e-2, 0.02, sigma=4.0, t_end=6.0, dt=0.05, record_every=5)
    return cfg, simulate(cfg)


def test_trace_columns_and_classification(run):
    cfg, tr = run
    assert tr.classification == "stable"
    assert not tr.events
    assert set(tr.samples[0]) == set(COLUMNS)
    t = tr.t
    assert t[0] == 0.0 and t[-1] == pytest.approx(cfg.t_end)
    assert np.all(np.diff(t) > 0)
    assert tr.summary["sup_f_ratio"] >= 1.0 - 1e-12


def test_csv_roundtrip(run):
    _, tr = run
    text = tr.to_csv()
    assert text.startswith("# schema: couette-lab-trace/1")
    back = read_trace_csv(text)
    for c in COLUMNS:
        np.testing.assert_array_equal(back.column(c), tr.column(c))


def test_append_rejects_non_increasing_time():
    tr = EnergyTrace()
    row = dict.fromkeys(COLUMNS, 0.0)
    tr.append(dict(row, t=1.0))
    with pytest.raises(ValueError):
        tr.append(dict(row, t=1.0))


def test_non_finite_row_terminates():
    tr = EnergyTrace(initial_norm=1.0)
    row = dict.fromkeys(COLUMNS, 0.0)
    tr.append(dict(row, t=0.0, f_Hsigma=1.0))
    tr.append(dict(row, t=1.0, f_Hsigma=math.inf))
    tr.finish()
    assert tr.classification == "unstable"
    assert tr.events[0]["kind"] == "non-finite"


def test_bootstrap_ratios_small_for_small_data(run):
    cfg, tr = run
    series = bootstrap_monitor(tr, cfg.epsilon, cfg.nu)
    assert list(series) == BOOTSTRAP_NAMES
    for s in series.values():
        assert s.t.size > 0 and np.all(s.t >= 1.0)
        assert s.max_ratio < 1.0, s.name
        assert s.first_violation is None


def test_bootstrap_zero_data_is_zero(run):
    _, tr = run
    assert all(s.max_ratio == 0.0 for s in bootstrap_monitor(tr, 0.0, 1e-2).values())


def test_theorem_report(run):
    cfg, tr = run
    rep = theorem_report(tr, cfg.nu, cfg.sigma, ceilings={"stability_ratio": 2.0, "C_ed": 1.0, "C_id": 1.0})
    assert rep.sup_stability_ratio <= 2.0
    assert rep.fit_window[0] == pytest.approx(cfg.nu ** (-1 / 3))
    assert rep.passed() and not rep.partial
    tight = theorem_report(tr, cfg.nu, cfg.sigma, ceilings={"stability_ratio": 0.0, "C_ed": 0.0, "C_id": 0.0})
    assert not tight.passed()


def test_theorem_report_empty_trace():
    rep = theorem_report(EnergyTrace(), 1e-2, 2.0)
    assert rep.partial and rep.checks == {}


def test_ck_nonnegative_and_weights_finite():
    g = Grid(8, 32)
    f = make_initial(g, "random_band", 1.0, 0.0, seed=2)
    p = WeightParams(1e-2, 0.5)
    for t in (0.0, 3.0, 20.0):
        assert ck_w(f, t, p) >= 0.0
        assert np.all(np.isfinite(weighted_coeffs(f, t, p)))


def test_schema_file_documents_every_column():
    import importlib.resources

    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    text = importlib.resources.files("couette_lab").joinpath("data/trace_schema.toml").read_text()
    doc = tomllib.loads(text)
    assert list(doc["columns"]) == COLUMNS
