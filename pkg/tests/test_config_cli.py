import json
import os

import pytest

from couette_lab.cli import main
from couette_lab.config import grid_from, parse_config, sim_config_from
from couette_lab.errors import ConfigError


def test_parse_and_convert():
    doc = parse_config('seed = 4\n[grid]\nKmax = 8\nNv = 32\n[run]\nnu = 0.01\namplitude = 0.1\npreset = "random_band"\n')
    g = grid_from(doc)
    assert (g.Kmax, g.Nv) == (8, 32)
    cfg = sim_config_from(doc, 4, t_end=2.0)
    assert cfg.nu == 0.01 and cfg.initial_preset == "random_band" and cfg.t_end == 2.0 and cfg.seed == 4


@pytest.mark.parametrize("text,line", [
    ("[run]\nnu = 0.01\nbogus = 1\n", 3),
    ("[grid]\nKmax = \"eight\"\n", 2),
    ("seed = 1\n[nosection]\nx = 1\n", 2),
    ("[run]\nnu = = 1\n", 2),
])
def test_bad_config_reports_line(text, line):
    with pytest.raises(ConfigError, match=f"line {line}"):
        parse_config(text)


def test_no_args_is_usage_error(capsys):
    assert main([]) == 2


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[run]\nnu = 0.01\nwat = 2\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "line 3" in capsys.readouterr().err


def test_verify_lemmas_writes_manifest(tmp_path, capsys):
    out = tmp_path / "lem"
    assert main(["verify-lemmas", "--lemma", "D-D", "--budget", "2000", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "verify-lemmas"
    assert set(man["files"]) == {"lemma_D-D.csv", "lemma_D-D_witness.json"}
    assert (out / "timings.json").exists()
    assert "PASS D-D/lower" in capsys.readouterr().out


def test_unknown_lemma_is_usage_error(tmp_path, capsys):
    assert main(["verify-lemmas", "--lemma", "nope", "--out", str(tmp_path)]) == 2


def test_out_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("COUETTE_LAB_OUT", str(tmp_path / "env"))
    assert main(["sweep", "--stub"]) == 0
    assert (tmp_path / "env" / "sweep.csv").exists()


def test_simulate_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[grid]\nKmax = 8\nNv = 32\n[run]\nnu = 0.01\namplitude = 0.02\nt_end = 2.0\nsigma = 4.0\n")
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "trace.csv").read_text().startswith("# meta: ")
    assert main(["report", "--trace", str(out / "trace.csv"), "--out", str(tmp_path / "rep")]) in (0, 1)
    assert main(["report", "--out", str(tmp_path / "rep2")]) == 2


def test_manifest_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["toy", "--out", str(d), "--seed", "3"]) == 0
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
