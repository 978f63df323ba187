import math

import numpy as np
import pytest

from couette_lab.sweep import CellResult, SweepSpec, fit_gamma, stub_classifier, sweep


def test_stub_gamma():
    rep = sweep(SweepSpec(tuple(np.logspace(-6, -2, 5)), 1e-3, 1.0, rtol=0.01))
    assert rep.gamma == pytest.approx(1 / 3, abs=0.01)
    for nu, (lo, hi) in rep.bracket.items():
        assert lo < nu ** (1 / 3) <= hi


def test_single_nu_gamma_undefined():
    rep = sweep(SweepSpec((1e-3,), 1e-3, 1.0))
    assert rep.gamma is None
    assert "gamma=undefined" in rep.summary()


def test_degenerate_bracket():
    rep = sweep(SweepSpec((1e-3,), 0.05, 0.05))
    assert rep.critical[1e-3] is None
    assert len(rep.rows) == 1


def _flaky(nu, amplitude, seed=0):
    if 0.05 < amplitude < 0.07:
        raise FloatingPointError("synthetic failure")
    return stub_classifier(nu, amplitude, seed)


def test_inconclusive_cell_does_not_abort():
    rep = sweep(SweepSpec((1e-3, 1e-2), 1e-3, 1.0, rtol=0.05), _flaky)
    bad = [r for r in rep.rows if r.classification == "inconclusive"]
    assert all(math.isnan(r.sup_energy_ratio) for r in bad)
    assert all(v is not None for v in rep.critical.values())


def test_workers_match_serial():
    spec = SweepSpec(tuple(np.logspace(-5, -2, 4)), 1e-3, 1.0)
    assert sweep(spec, workers=1).to_csv() == sweep(spec, workers=2).to_csv()


def test_bracket_expansion():
    rep = sweep(SweepSpec((1e-3,), 0.5, 0.9, expand=3))
    lo, hi = rep.bracket[1e-3]
    assert lo < 0.1 <= hi


def test_fit_gamma_exact_power():
    crit = {nu: 2.0 * nu**0.5 for nu in (1e-4, 1e-3, 1e-2)}
    g, _ = fit_gamma(crit)
    assert g == pytest.approx(0.5, abs=1e-12)
    assert fit_gamma({1e-3: None, 1e-2: 0.1})[0] is None


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec((), 1e-3, 1.0)
    with pytest.raises(ValueError):
        SweepSpec((1e-3,), 1.0, 0.1)


def test_cell_result_fields():
    c = stub_classifier(1e-3, 0.05)
    assert isinstance(c, CellResult) and c.classification == "stable"
