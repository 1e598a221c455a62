import json

import numpy as np
import pytest
import yaml

from planar_mhd import outputs
from planar_mhd.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, main, run
from planar_mhd.config import ConfigError, config_from_dict, load_config, parse_text
from planar_mhd.scenarios import get_scenario


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data))
    return path


def test_minimal_config_defaults():
    cfg = config_from_dict({"t_final": 0.5})
    assert cfg.scenario == "rest" and cfg.n_cells == 64
    assert cfg.params.is_normalized and cfg.params.alpha == 0 and cfg.params.beta == 1
    assert cfg.controls.t_final == 0.5 and cfg.warnings == []


def test_alpha_sets_mu2():
    cfg = config_from_dict({"t_final": 1, "params": {"alpha": 2}})
    assert cfg.params.mu2 == 2.0


def test_beta_zero_warns():
    cfg = config_from_dict({"t_final": 1, "params": {"beta": 0}})
    assert any("beta" in w for w in cfg.warnings)


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"t_final": 1, "scenario": "large-oscillation", "scenario_options": {"amp_v": 1.5}}, "scenario_options"),
        ({"t_final": 1, "viscosity": 2}, "viscosity"),
        ({"t_final": 1, "params": {"gamma": 1.4}}, "params.gamma"),
        ({"t_final": 1, "params": {"kappa0": -1}}, "params.kappa0"),
        ({"t_final": 1, "controls": {"cfl": 2}}, "controls"),
        ({"t_final": 1, "n_cells": 2}, "n_cells"),
        ({"t_final": -1}, "t_final"),
        ({}, "t_final"),
        ({"t_final": 1, "scenario": "vortex"}, "scenario"),
        ({"t_final": 1, "magnetic": "yes"}, "magnetic"),
    ],
)
def test_invalid_configs_name_field(raw, field):
    with pytest.raises(ConfigError) as info:
        config_from_dict(raw)
    assert info.value.field == field


def test_parse_error_has_line():
    with pytest.raises(ConfigError, match=r"run.yaml:2:9"):
        parse_text("t_final: 1\nparams: : 2\n", "run.yaml")


def test_fixed_dt_control():
    cfg = config_from_dict({"t_final": 1, "controls": {"fixed_dt": 0.01}})
    assert cfg.controls.dt_min == cfg.controls.dt_max == 0.01


def test_rest_run_outputs(tmp_path):
    cfg = config_from_dict({"t_final": 0.1, "n_cells": 8, "controls": {"fixed_dt": 0.01}, "snapshot_every": 5})
    assert run(cfg, tmp_path) == EXIT_OK
    series = outputs.read_series(tmp_path / "series.csv")
    assert len(series) == 11 and series[0].t == 0 and series[-1].t == 0.1
    for s in series:
        assert s.mass == pytest.approx(1.0, abs=1e-15) and s.V <= 1e-28
        assert s.e_paper == pytest.approx(2.0, abs=1e-14)
    rep = outputs.read_representation(tmp_path / "representation.csv")
    assert np.all(rep["max_rel_err"] <= 1e-13)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["status"] == "ok" and meta["steps"] == 10
    assert meta["config"]["output_dir"] == str(tmp_path)
    assert meta["bounds"]["bounded"] is True
    snaps = sorted(p.name for p in (tmp_path / "snapshots").iterdir())
    assert "t=0.100000000.csv" in snaps and "t=0.050000000.nodes.csv" in snaps


def test_runs_are_deterministic(tmp_path):
    raw = {"t_final": 0.05, "n_cells": 16, "scenario": "random-perturbation", "seed": 4}
    for d in ("a", "b"):
        assert run(config_from_dict(raw), tmp_path / d) == EXIT_OK
    assert (tmp_path / "a/series.csv").read_bytes() == (tmp_path / "b/series.csv").read_bytes()


def test_snapshot_roundtrip(tmp_path):
    s = get_scenario("random-perturbation").build(12, seed=1)
    c, n = outputs.write_snapshot(tmp_path, s)
    back = outputs.read_snapshot(c, n)
    assert back.max_deviation(s) == 0
    with pytest.raises(outputs.FormatError):
        outputs.read_snapshot(n, c)


def test_initial_state_from_files(tmp_path):
    s = get_scenario("smooth").build(8)
    outputs.write_snapshot(tmp_path, s)
    c, n = outputs.snapshot_paths(tmp_path, 0.0)
    cfg_path = write_yaml(tmp_path / "run.yaml", {
        "t_final": 0.02, "n_cells": 8, "initial_state": {"centers": c.name, "nodes": n.name},
    })
    cfg = load_config(cfg_path)
    assert cfg.scenario is None
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "out")]) == EXIT_OK
    first = outputs.read_series(tmp_path / "out/series.csv")[0]
    assert first.max_v == pytest.approx(s.v.max(), rel=1e-15)


def test_sweep_with_jobs(tmp_path, capsys):
    sweep = {
        "base": {"t_final": 0.05, "n_cells": 8, "scenario": "smooth"},
        "runs": [{"name": "a0", "params": {"alpha": 0}}, {"name": "a1", "params": {"alpha": 1}}],
    }
    path = write_yaml(tmp_path / "sweep.yaml", sweep)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "s"), "--jobs", "2"]) == EXIT_OK
    for name, alpha in (("a0", 0), ("a1", 1)):
        meta = json.loads((tmp_path / "s" / name / "meta.json").read_text())
        assert meta["config"]["params"]["alpha"] == alpha
    assert "a1: exit 0" in capsys.readouterr().out


def test_audit(tmp_path, capsys):
    cfg = config_from_dict({"t_final": 0.05, "n_cells": 8})
    run(cfg, tmp_path)
    assert main(["audit", "--series", str(tmp_path / "series.csv")]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["bounded"] is True
    # tamper with a row so the bounds monitor sees an infinite value
    lines = (tmp_path / "series.csv").read_text().splitlines()
    cols = lines[-1].split(",")
    cols[outputs.SERIES_COLUMNS.index("max_v")] = "inf"
    lines[-1] = ",".join(cols)
    (tmp_path / "bad.csv").write_text("\n".join(lines) + "\n")
    assert main(["audit", "--series", str(tmp_path / "bad.csv")]) == EXIT_VERIFY


def test_exit_codes(tmp_path):
    bad = write_yaml(tmp_path / "bad.yaml", {"t_final": 1, "bogus": 1})
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert main(["simulate", "--config", str(tmp_path / "missing.yaml")]) == EXIT_CONFIG
    assert main(["verify", "mms", "--levels", "2"]) == EXIT_CONFIG
    assert main(["audit", "--series", str(bad)]) == EXIT_CONFIG
    failing = write_yaml(tmp_path / "fail.yaml", {
        "t_final": 0.5, "n_cells": 16, "scenario": "ns-limit", "scenario_options": {"amp_u": 60.0},
        "controls": {"cfl": 1.0, "dt_min": 0.2, "dt_max": 1.0},
    })
    out = tmp_path / "f"
    assert main(["simulate", "--config", str(failing), "--out", str(out)]) == EXIT_SOLVER
    meta = json.loads((out / "meta.json").read_text())
    assert meta["status"] == "solver_failure" and meta["error"]["type"] == "DtUnderflow"


def test_scenarios_list_and_oracle(capsys):
    assert main(["scenarios", "list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "large-oscillation" in out and "random-perturbation" in out
    assert main(["verify", "oracle"]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_representation_skipped_when_not_normalized(tmp_path):
    cfg = config_from_dict({"t_final": 0.02, "n_cells": 8, "params": {"mu1": 2.0}})
    assert run(cfg, tmp_path) == EXIT_OK
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["representation"].startswith("skipped")
    assert outputs.read_representation(tmp_path / "representation.csv")["t"].size == 0


def test_magnetic_flag(tmp_path):
    raw = {"t_final": 0.05, "n_cells": 8, "scenario": "ns-limit"}
    run(config_from_dict(raw), tmp_path / "m")
    run(config_from_dict({**raw, "magnetic": False}), tmp_path / "n")
    a = outputs.read_series(tmp_path / "m/series.csv")[-1]
    b = outputs.read_series(tmp_path / "n/series.csv")[-1]
    assert a.h1_b == b.h1_b == 0
    assert a.total_energy == pytest.approx(b.total_energy, abs=1e-12)
