import json

import pytest
import yaml

from dispatchkit.cli import main


@pytest.fixture
def square_yaml(tmp_path):
    cfg = {
        "scenario": {"kind": "ea"},
        "data": {"synth": {"kind": "square", "days": 2}},
        "battery": {
            "capacity_kwh": 10.0,
            "pmax_charge_kw": -5.0,
            "pmax_discharge_kw": 5.0,
        },
        "market": {"name": "grid", "price_column": "price"},
        "run": {"out_dir": str(tmp_path / "out")},
    }
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def test_run_happy_path(square_yaml, tmp_path, capsys):
    out = str(tmp_path / "run1")
    assert main(["run", "--config", square_yaml, "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "optimizer exact" in stdout
    with open(f"{out}/report.json") as fh:
        assert json.load(fh)["steps"] == 48


def test_run_with_overrides(square_yaml, tmp_path, capsys):
    out = str(tmp_path / "run2")
    code = main(["run", "--config", square_yaml, "--out", out, "scenario.n_days=1"])
    assert code == 0
    with open(f"{out}/report.json") as fh:
        assert json.load(fh)["days"] == 1


def test_missing_config_is_exit_1(capsys):
    assert main(["run", "--config", "nope.yaml"]) == 1
    assert "config error" in capsys.readouterr().err


def test_bad_override_is_exit_1(square_yaml, capsys):
    assert main(["run", "--config", square_yaml, "battery.frob=1"]) == 1


def test_data_problem_is_exit_2(square_yaml, capsys):
    # more days than the synth table holds
    assert main(["run", "--config", square_yaml, "scenario.n_days=99"]) == 2
    assert "data error" in capsys.readouterr().err


def test_report_verb(square_yaml, tmp_path, capsys):
    out = str(tmp_path / "run3")
    main(["run", "--config", square_yaml, "--out", out])
    capsys.readouterr()
    assert main(["report", "--out", out, "--plots"]) == 0
    stdout = capsys.readouterr().out
    assert "scenario: ea" in stdout
    assert (tmp_path / "run3" / "soc.svg").exists()


def test_schedule_verb(square_yaml, tmp_path, capsys):
    out = str(tmp_path / "run4")
    code = main(
        ["schedule", "--config", square_yaml, "--out", out, "--cadence-min", "120"]
    )
    assert code == 0
    assert "ticks 24" in capsys.readouterr().out


def test_bench_verb(square_yaml, tmp_path, capsys):
    out = str(tmp_path / "run5")
    code = main(
        ["bench", "--config", square_yaml, "--out", out, "--repeats", "1",
         "--optimizers", "exact,sa", "optimizer.sa.iters=500"]
    )
    assert code == 0
    assert (tmp_path / "run5" / "bench.csv").exists()


def test_sweep_verb(square_yaml, tmp_path, capsys):
    with open(square_yaml) as fh:
        cfg = yaml.safe_load(fh)
    cfg["sweep"] = {"path": "battery.pmax_discharge_kw", "values": [1.0, 5.0]}
    with open(square_yaml, "w") as fh:
        fh.write(yaml.safe_dump(cfg))
    out = str(tmp_path / "run6")
    assert main(["sweep", "--config", square_yaml, "--out", out]) == 0
    assert "crossing value" in capsys.readouterr().out
    assert (tmp_path / "run6" / "sweep.csv").exists()


def test_events_verb_rejects_peeking(square_yaml, capsys):
    # default accurate forecaster cannot run in event mode
    assert main(["events", "--config", square_yaml]) == 1
