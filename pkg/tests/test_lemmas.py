import json
import math

import pytest

from couette_lab.lemmas import SUITES, load_ceilings, replay, run_suite

SMALL = {"product": 6, "commutator": 6, "composition": 6}


def _budget(name):
    return SMALL.get(name, 2000)


@pytest.mark.parametrize("name", list(SUITES))
def test_suite_passes_at_small_budget(name):
    res = run_suite(name, sample_budget=_budget(name), seed=3)
    assert res.checks
    for c in res.checks:
        assert c.passed, (c.name, c.worst, c.bound)
        assert c.samples > 0


@pytest.mark.parametrize("name", list(SUITES))
def test_replay_reproduces_worst(name):
    res = run_suite(name, sample_budget=_budget(name), seed=5)
    for c in res.checks:
        wit = json.loads(json.dumps(c.witness))
        assert replay(name, c.name, wit) == pytest.approx(c.worst, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("name", ["rho", "w-w", "product"])
def test_deterministic_by_seed(name):
    a = run_suite(name, sample_budget=_budget(name), seed=11)
    b = run_suite(name, sample_budget=_budget(name), seed=11)
    assert a.to_csv() == b.to_csv()
    assert a.witness_json() == b.witness_json()


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("no-such-lemma")


def test_ceilings_have_bounds():
    ceil = load_ceilings()
    for name in SUITES:
        assert name in ceil["lemmas"]
        for spec in ceil["lemmas"][name].values():
            assert math.isfinite(float(spec["bound"]))
    assert {"stability_ratio", "C_ed", "C_id"} <= set(ceil["theorem"])


def test_csv_layout():
    res = run_suite("D-D", sample_budget=1000)
    lines = res.to_csv().splitlines()
    assert lines[0].startswith("# lemma suite D-D")
    assert lines[1].split(",")[:4] == ["lemma", "check", "kind", "samples"]
    assert len(lines) == 2 + len(res.checks)
