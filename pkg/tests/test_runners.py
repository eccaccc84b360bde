import json
import os

import pytest

from dispatchkit.config import load_resolved, resolve_config
from dispatchkit.errors import ConfigInvalid, OutOfOrderData
from dispatchkit.reporting import compute_totals, read_trace
from dispatchkit.runners import (
    Driver,
    benchmark,
    event_runner,
    run,
    scheduled_runner,
)
from dispatchkit.scenarios import build_scenario


def square_cfg(days=2, forecaster=None, **extra):
    cfg = {
        "scenario": {"kind": "ea"},
        "data": {"synth": {"kind": "square", "days": days}},
        "battery": {
            "capacity_kwh": 10.0,
            "pmax_charge_kw": -5.0,
            "pmax_discharge_kw": 5.0,
        },
        "market": {"name": "grid", "price_column": "price"},
        "optimizer": {"sa": {"iters": 2000}, "q": {"episodes": 40}},
    }
    if forecaster:
        cfg["scenario"]["forecaster"] = forecaster
    cfg.update(extra)
    return resolve_config(cfg)


def test_run_exact_smoke():
    report = run(square_cfg(), "exact")
    assert report.scenario == "ea"
    assert report.optimizer == "exact"
    assert report.days == 2
    assert report.steps == 48
    assert report.decisions == 2  # one plan per day
    assert report.totals["r_net"] > 0
    assert report.backend in ("pure", "compiled")


def test_run_totals_sum_trace(tmp_path):
    report = run(square_cfg(), "exact", out_dir=str(tmp_path))
    trace = read_trace(report.trace_path)
    assert len(trace) == report.steps
    assert compute_totals(trace) == report.totals
    with open(os.path.join(tmp_path, "report.json")) as fh:
        on_disk = json.load(fh)
    assert on_disk["totals"] == report.totals
    assert on_disk["decisions"] == report.decisions


def test_run_writes_plots(tmp_path):
    run(square_cfg(), "exact", out_dir=str(tmp_path), plots=True)
    assert (tmp_path / "soc.svg").exists()
    assert (tmp_path / "reward.svg").exists()


@pytest.mark.parametrize("optimizer,decisions_per_day", [("sa", 1), ("mpc", 24), ("q", 24)])
def test_run_other_optimizers(optimizer, decisions_per_day):
    report = run(square_cfg(), optimizer)
    assert report.steps == 48
    assert report.decisions == 2 * decisions_per_day


def test_unknown_optimizer():
    rc = square_cfg()
    scenario = build_scenario(rc.scenario, rc.n_days)
    with pytest.raises(ConfigInvalid):
        Driver(scenario.env, "milp", rc)


def test_sa_seed_reproducible():
    rc = square_cfg()
    a = run(rc, "sa", seed=3)
    b = run(rc, "sa", seed=3)
    assert a.totals == b.totals


def test_q_train_days_validation():
    rc = square_cfg()
    rc = type(rc)(
        scenario=rc.scenario,
        sa_params=rc.sa_params,
        q_params=rc.q_params,
        n_days=rc.n_days,
        q_train_days=9,
        out_dir=rc.out_dir,
        raw=rc.raw,
    )
    with pytest.raises(ConfigInvalid):
        run(rc, "q")


# -- the three execution paths ------------------------------------------------


def test_execution_paths_agree():
    rc = square_cfg(days=4, forecaster={"kind": "yesterday"})
    batch = run(rc, "exact")
    ticked = scheduled_runner(rc, "exact")
    evented = event_runner(rc, "exact")
    assert batch.steps == ticked.steps == evented.steps == 72
    assert batch.totals == ticked.totals
    assert batch.totals == evented.totals
    assert batch.decisions == ticked.decisions == evented.decisions


def test_scheduled_tick_grouping():
    report = scheduled_runner(square_cfg(), "exact", cadence_min=120)
    assert report.steps == 48
    assert report.extras["ticks"] == 24
    assert report.extras["cadence_min"] == 120


def test_scheduled_max_ticks():
    report = scheduled_runner(square_cfg(), "exact", max_ticks=3)
    assert report.steps == 3
    assert report.extras["ticks"] == 3


@pytest.mark.parametrize("cadence", [0, -60, 90])
def test_scheduled_cadence_validation(cadence):
    with pytest.raises(ConfigInvalid):
        scheduled_runner(square_cfg(), "exact", cadence_min=cadence)


# -- event feed ---------------------------------------------------------------


def table_rows(rc):
    env = build_scenario(rc.scenario, rc.n_days).env
    return [
        (env.price.timestamp_at(i), {"price": float(env.price.values[i])})
        for i in range(len(env.price))
    ]


def test_event_rejects_future_peeking_forecaster():
    with pytest.raises(ConfigInvalid):
        event_runner(square_cfg(), "exact")  # accurate peeks


def test_event_consumes_prestart_history():
    rc = square_cfg(days=4, forecaster={"kind": "yesterday"})
    report = event_runner(rc, "exact", feed=iter(table_rows(rc)))
    assert report.steps == 72  # day 0 is warm-up, rows for it just flow by
    assert report.extras["rows_consumed"] == 96


def test_event_duplicate_row_raises():
    rc = square_cfg(days=4, forecaster={"kind": "yesterday"})
    rows = table_rows(rc)
    rows.insert(30, rows[29])
    with pytest.raises(OutOfOrderData):
        event_runner(rc, "exact", feed=iter(rows))


def test_event_gap_raises():
    rc = square_cfg(days=4, forecaster={"kind": "yesterday"})
    rows = table_rows(rc)
    del rows[30]
    with pytest.raises(OutOfOrderData):
        event_runner(rc, "exact", feed=iter(rows))


def test_event_value_mismatch_raises():
    rc = square_cfg(days=4, forecaster={"kind": "yesterday"})
    rows = table_rows(rc)
    ts, row = rows[40]
    rows[40] = (ts, {"price": row["price"] + 1.0})
    with pytest.raises(OutOfOrderData):
        event_runner(rc, "exact", feed=iter(rows))


# -- bidding through the runner -----------------------------------------------


def test_run_bidding_day_counts():
    rc = load_resolved("configs/bo.yaml")
    report = run(rc, "exact")
    assert report.scenario == "bo"
    assert report.days == 3
    assert report.decisions == 147  # 3 days x (1 daily + 48 half-hour)
    assert len(report.extras["settlements"]) == 3
    assert report.extras["commitments"] > 0


# -- benchmark ----------------------------------------------------------------


def test_benchmark_rows_and_csv(tmp_path):
    rows = benchmark(square_cfg(), optimizers=("exact", "sa"), repeats=2, out_dir=str(tmp_path))
    assert [r["optimizer"] for r in rows] == ["exact", "sa"]
    for r in rows:
        assert r["repeats"] == 2
        assert r["decisions"] == 4  # 2 days x 2 repeats
        assert r["latency_mean_s"] >= 0.0
        assert r["latency_std_s"] >= 0.0
    with open(tmp_path / "bench.csv") as fh:
        header = fh.readline().strip().split(",")
    assert "optimizer" in header and "latency_mean_s" in header


def test_benchmark_repeats_validation():
    with pytest.raises(ConfigInvalid):
        benchmark(square_cfg(), repeats=0)
