import json

import numpy as np
import pytest

from darbouxlab.cli import main
from darbouxlab.errors import ConfigError, FileFormatError
from darbouxlab.io import load_matrix, read_config_file, read_json, write_csv
from darbouxlab.suites import ExperimentConfig, trial_rng


def run(args, tmp_path):
    return main(args + ["--out", str(tmp_path)])


def test_verify_passes_and_writes_reports(tmp_path, capsys):
    assert run(["verify", "casimir", "--trials", "2"], tmp_path) == 0
    out = capsys.readouterr().out
    assert "PASS casimir" in out
    rep = json.loads((tmp_path / "report_casimir.json").read_text())
    assert rep["passed"]
    assert (tmp_path / "trials_casimir.csv").exists()


def test_failed_tolerance_gives_exit_one(tmp_path):
    assert run(["verify", "casimir", "--trials", "2", "--tol-casimir", "1e-300"], tmp_path) == 1


def test_identical_seeds_give_identical_csv(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["verify", "form", "--trials", "2", "--seed", "7", "--out", str(d)]) == 0
    assert (a / "trials_form.csv").read_bytes() == (b / "trials_form.csv").read_bytes()


def test_bad_configuration_gives_exit_two(tmp_path, capsys):
    assert run(["verify", "form", "--n", "1"], tmp_path) == 2
    assert run(["verify", "form", "--tol-nonsense", "1"], tmp_path) == 2
    assert run(["verify", "form", "--bogus"], tmp_path) == 2
    assert "error" in capsys.readouterr().err


def test_config_file_and_environment(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\ntrials = 1\nseed = 3\n")
    out = tmp_path / "env_out"
    monkeypatch.setenv("DARBOUXLAB_OUT", str(out))
    assert main(["verify", "casimir", "--config", str(cfg)]) == 0
    rep = json.loads((out / "report_casimir.json").read_text())
    assert rep["config"]["trials"] == 1 and rep["config"]["seed"] == 3


def test_malformed_json_is_reported_with_location(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text('[[1, 2],\n [3, ]]\n')
    assert run(["darboux", str(bad)], tmp_path) == 2
    err = capsys.readouterr().err
    assert "m.json:2:" in err


def test_darboux_chart_of_a_matrix(tmp_path, capsys):
    m = tmp_path / "a.json"
    m.write_text(json.dumps([[2, 1], [[0.5, 0.5], 1]]))
    assert run(["darboux", str(m)], tmp_path) == 0
    chart = json.loads((tmp_path / "chart.json").read_text())
    a = load_matrix(m)
    p = np.log(a[0, 0] * a[1, 1] / np.linalg.det(a))
    assert chart["p_re"][0] == pytest.approx(p.real) and chart["p_im"][0] == pytest.approx(p.imag)


def test_darboux_of_diagonal_matrix_is_degenerate(tmp_path):
    m = tmp_path / "d.json"
    m.write_text(json.dumps([[1, 0], [0, 2]]))
    assert run(["darboux", str(m)], tmp_path) == 2


def test_su3_flow_writes_csv(tmp_path):
    assert run(["su3-flow", "--t", "0.5", "--steps", "50"], tmp_path) == 0
    lines = (tmp_path / "pendulum.csv").read_text().splitlines()
    assert len(lines) == 52 and lines[0].startswith("t,I1,I2,I3,omega")


def test_scatter_small_grid(tmp_path, capsys):
    code = run(["scatter", "--grid-n-xi", "9", "--t", "0.2", "--k", "1"], tmp_path)
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["invariance"]["p_drift"] <= 1e-8
    assert (tmp_path / "evolved.csv").exists()


def test_scatter_rejects_wrong_mu(tmp_path):
    assert run(["scatter", "--grid-n-xi", "5", "--t", "0.2", "--mu", "1j,-1j"], tmp_path) == 2


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"trials": "0"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"tol_unknown": "1"})
    cfg = ExperimentConfig.from_mapping({"tol_jacobi": "1e-3", "n": "2"})
    assert cfg.tol("jacobi") == 1e-3 and cfg.n == 2


def test_config_file_syntax_errors(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("seed = 1\nno equals sign\n")
    with pytest.raises(FileFormatError, match="bad.cfg:2"):
        read_config_file(p)
    with pytest.raises(FileFormatError):
        read_json(tmp_path / "missing.json")


def test_trial_streams_are_independent_and_reproducible():
    a = trial_rng(1, "form.x", 0).standard_normal(4)
    assert np.array_equal(a, trial_rng(1, "form.x", 0).standard_normal(4))
    assert not np.array_equal(a, trial_rng(1, "form.x", 1).standard_normal(4))
    assert not np.array_equal(a, trial_rng(1, "form.y", 0).standard_normal(4))


def test_csv_numbers_round_trip(tmp_path):
    x = 0.1 + 0.2
    write_csv(tmp_path / "x.csv", ["v"], [[x]])
    assert float((tmp_path / "x.csv").read_text().splitlines()[1]) == x
