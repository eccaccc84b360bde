"""Execution drivers: batch run, virtual-clock scheduler, event feed.

All three pump the same (decide, step) sequence through the same
environment, so for a fixed config and optimizer their realized totals
are identical bit for bit; they differ only in what triggers the next
step and what bookkeeping they add around it.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import asdict

from .config import ResolvedConfig, with_seed
from .entities import BatteryAction
from .environment import Environment
from .errors import ConfigInvalid, OutOfOrderData
from .optimizers import QParams, SAParams, act, solve_exact, solve_sa, train_q
from .reporting import (
    RunReport,
    TraceRow,
    compute_totals,
    ensure_dir,
    latency_stats,
    svg_line_plot,
    write_report,
    write_trace,
)
from .scenarios import KIND_BO, Scenario, build_scenario
from . import _kernels

log = logging.getLogger("dispatchkit")

OPTIMIZERS = ("exact", "sa", "mpc", "q")


class Driver:
    """Action provider for one environment run.

    exact/sa plan a whole day at the day boundary and execute open
    loop; mpc replans every step; q acts greedily from a table trained
    up front.  Bidding environments follow their bid-time battery plan
    and the optimizer flag only shapes that planner's inner loop.
    """

    def __init__(self, env: Environment, optimizer: str, rc: ResolvedConfig):
        if optimizer not in OPTIMIZERS:
            raise ConfigInvalid(f"unknown optimizer {optimizer!r} (have {OPTIMIZERS})")
        self.env = env
        self.optimizer = optimizer
        self.rc = rc
        self.is_bidding = env.scenario_kind == KIND_BO
        self._plan = None
        self._plan_day = -1
        self.train_s = 0.0
        self.policy = None
        if optimizer == "q" and not self.is_bidding:
            t0 = time.perf_counter()
            self.policy = self._train()
            self.train_s = time.perf_counter() - t0

    def _train(self):
        env = self.env
        spd = env.spd
        first_day = env.begin // spd
        run_days = env.n_steps // spd
        span = self.rc.q_train_days or run_days
        if span < 1 or span > run_days:
            raise ConfigInvalid(f"q train_days {span} outside run range of {run_days} days")

        def factory(episode: int) -> Environment:
            day = first_day + episode % span
            return env.spawn(day * spd, spd)

        return train_q(factory, self.rc.q_params)

    def decide(self) -> tuple[BatteryAction, list, int, float | None]:
        """Returns (action, bids, decisions_made, planning_latency_s)."""
        env = self.env
        if self.is_bidding:
            t0 = time.perf_counter()
            decisions, bids = env.due_bids()
            latency = time.perf_counter() - t0 if decisions else None
            return env.preferred_action(), bids, len(decisions), latency

        if self.optimizer in ("exact", "sa"):
            if env.day_index != self._plan_day:
                t0 = time.perf_counter()
                model = env.planning_model()
                if self.optimizer == "exact":
                    self._plan = solve_exact(model)
                else:
                    day_seed = self.rc.sa_params.seed + env.day_index
                    params = SAParams(
                        iters=self.rc.sa_params.iters,
                        t_initial=self.rc.sa_params.t_initial,
                        cooling=self.rc.sa_params.cooling,
                        seed=day_seed,
                    )
                    self._plan = solve_sa(model, params)
                self._plan_day = env.day_index
                return self._plan.actions[env.step_in_day], [], 1, time.perf_counter() - t0
            return self._plan.actions[env.step_in_day], [], 0, None

        if self.optimizer == "mpc":
            t0 = time.perf_counter()
            plan = solve_exact(env.planning_model(self.rc.scenario.horizon))
            return plan.actions[0], [], 1, time.perf_counter() - t0

        # q
        t0 = time.perf_counter()
        action = act(self.policy, self.env.state())
        return action, [], 1, time.perf_counter() - t0


def _pump_step(env: Environment, driver: Driver, trace: list[TraceRow], latencies: list[float]) -> int:
    """One decide+step cycle; returns decisions made."""
    t = env.t
    now = env.now
    action, bids, n_dec, latency = driver.decide()
    state, rc_, _, _ = env.step(action, bids)
    if latency is not None:
        latencies.append(latency)
    trace.append(
        TraceRow(
            t=t,
            timestamp=now,
            action=action.name,
            soc=state.battery.soc if state.battery else 0.0,
            r_price=rc_.r_price,
            r_carbon=rc_.r_carbon,
            r_deg=rc_.r_deg,
            r_net=rc_.r_net,
        )
    )
    return n_dec


def _finish(
    scenario: Scenario,
    driver: Driver,
    trace: list[TraceRow],
    decisions: int,
    latencies: list[float],
    optimizer: str,
    out_dir: str | None,
    extras: dict,
    plots: bool = False,
) -> RunReport:
    env = scenario.env
    mean, std = latency_stats(latencies)
    extras = {"actions_active": sum(1 for r in trace if r.action != "IDLE"), **extras}
    if driver.train_s:
        extras = {**extras, "q_train_s": driver.train_s}
    if env.scenario_kind == KIND_BO:
        extras = {
            **extras,
            "settlements": [asdict(s) | {"profit": s.profit} for s in env.settlements],
            "commitments": len(env.commitments),
        }
    report = RunReport(
        scenario=env.scenario_kind,
        optimizer=optimizer,
        backend=_kernels.BACKEND,
        days=env.n_steps // env.spd,
        steps=len(trace),
        decisions=decisions,
        totals=compute_totals(trace),
        latency_mean_s=mean,
        latency_std_s=std,
        extras=extras,
    )
    if out_dir:
        ensure_dir(out_dir)
        report.trace_path = os.path.join(out_dir, "trace.csv")
        write_trace(report.trace_path, trace)
        write_report(os.path.join(out_dir, "report.json"), report)
        if plots and trace:
            svg_line_plot(
                os.path.join(out_dir, "soc.svg"),
                {"soc": [r.soc for r in trace]},
                title="state of charge",
            )
            cum = []
            acc = 0.0
            for r in trace:
                acc += r.r_net
                cum.append(acc)
            svg_line_plot(
                os.path.join(out_dir, "reward.svg"),
                {"cumulative net reward": cum},
                title="cumulative net reward",
            )
    return report


def run(
    rc: ResolvedConfig,
    optimizer: str = "exact",
    out_dir: str | None = None,
    seed: int | None = None,
    plots: bool = False,
) -> RunReport:
    """Run the whole configured range, one day at a time."""
    rc = with_seed(rc, seed)
    scenario = build_scenario(rc.scenario, rc.n_days)
    driver = Driver(scenario.env, optimizer, rc)
    trace: list[TraceRow] = []
    latencies: list[float] = []
    decisions = 0
    while not scenario.env.done:
        decisions += _pump_step(scenario.env, driver, trace, latencies)
    return _finish(scenario, driver, trace, decisions, latencies, optimizer, out_dir, {}, plots)


def scheduled_runner(
    rc: ResolvedConfig,
    optimizer: str = "exact",
    cadence_min: int | None = None,
    max_ticks: int | None = None,
    out_dir: str | None = None,
    seed: int | None = None,
) -> RunReport:
    """Virtual-clock driver: one tick per cadence, stepping the data
    granularity underneath.  A tick whose wall-clock work exceeds its
    cadence is logged as an overrun (never raised)."""
    rc = with_seed(rc, seed)
    scenario = build_scenario(rc.scenario, rc.n_days)
    env = scenario.env
    gran = env.price.granularity_min
    cadence = gran if cadence_min is None else cadence_min
    if cadence <= 0 or cadence % gran != 0:
        raise ConfigInvalid(f"cadence {cadence} must be a positive multiple of {gran} min")
    steps_per_tick = cadence // gran
    driver = Driver(env, optimizer, rc)
    trace: list[TraceRow] = []
    latencies: list[float] = []
    decisions = 0
    ticks = 0
    while not env.done and (max_ticks is None or ticks < max_ticks):
        tick_started = time.perf_counter()
        for _ in range(steps_per_tick):
            if env.done:
                break
            decisions += _pump_step(env, driver, trace, latencies)
        ticks += 1
        elapsed = time.perf_counter() - tick_started
        if elapsed > cadence * 60.0:
            log.warning("tick overrun: tick %d took %.3fs of a %d min budget", ticks, elapsed, cadence)
    return _finish(
        scenario, driver, trace, decisions, latencies, optimizer, out_dir,
        {"ticks": ticks, "cadence_min": cadence},
    )


def _table_feed(env: Environment, rc: ResolvedConfig):
    """Default feed: replay the backing series as timestamped rows."""
    for i in range(env.begin, env.end):
        row = {"price": float(env.price.values[i])}
        if env.carbon is not None:
            row["carbon"] = float(env.carbon.values[i])
        yield env.price.timestamp_at(i), row


def event_runner(
    rc: ResolvedConfig,
    optimizer: str = "exact",
    feed=None,
    out_dir: str | None = None,
    seed: int | None = None,
) -> RunReport:
    """Event-driven driver: steps only when the feed delivers the row
    for the environment's current timestamp.

    Rows must arrive in order (stale rows and gaps raise
    OutOfOrderData) and must agree with the backing table.  Forecasters
    that peek at future actuals are rejected: in event mode the future
    has not arrived.
    """
    rc = with_seed(rc, seed)
    if rc.scenario.forecaster.peeks_at_future:
        raise ConfigInvalid(
            f"{rc.scenario.forecaster.kind!r} forecaster peeks at future data; "
            "event mode only supports history-based forecasters"
        )
    scenario = build_scenario(rc.scenario, rc.n_days)
    env = scenario.env
    driver = Driver(env, optimizer, rc)
    trace: list[TraceRow] = []
    latencies: list[float] = []
    decisions = 0
    rows = 0
    last_ts = None
    for ts, row in feed if feed is not None else _table_feed(env, rc):
        if last_ts is not None and ts <= last_ts:
            raise OutOfOrderData(f"row {ts} arrived after {last_ts}")
        last_ts = ts
        rows += 1
        if env.done:
            break
        expected = env.now
        if ts < expected:
            continue  # pre-start history row
        if ts > expected:
            raise OutOfOrderData(f"expected row for {expected}, feed jumped to {ts}")
        idx = env.price.index_of(ts)
        if "price" in row and row["price"] != float(env.price.values[idx]):
            raise OutOfOrderData(f"feed value for {ts} disagrees with backing data")
        decisions += _pump_step(env, driver, trace, latencies)
    return _finish(
        scenario, driver, trace, decisions, latencies, optimizer, out_dir,
        {"rows_consumed": rows},
    )


def benchmark(
    rc: ResolvedConfig,
    optimizers: tuple[str, ...] = ("exact", "sa", "q"),
    repeats: int = 3,
    out_dir: str | None = None,
    seed: int | None = None,
) -> list[dict]:
    """Per-decision planning latency, mean and std across repeats."""
    if repeats < 1:
        raise ConfigInvalid("repeats must be >= 1")
    rows = []
    for optimizer in optimizers:
        latencies: list[float] = []
        train_s = 0.0
        decisions = 0
        for rep in range(repeats):
            rc_rep = with_seed(rc, (seed or 0) + rep if seed is not None else None)
            scenario = build_scenario(rc_rep.scenario, rc_rep.n_days)
            driver = Driver(scenario.env, optimizer, rc_rep)
            train_s += driver.train_s
            trace: list[TraceRow] = []
            lats: list[float] = []
            n = 0
            while not scenario.env.done:
                n += _pump_step(scenario.env, driver, trace, lats)
            latencies.extend(lats)
            decisions += n
        mean, std = latency_stats(latencies)
        rows.append(
            {
                "optimizer": optimizer,
                "backend": _kernels.BACKEND,
                "repeats": repeats,
                "decisions": decisions,
                "latency_mean_s": mean,
                "latency_std_s": std,
                "train_s": train_s,
            }
        )
    if out_dir:
        ensure_dir(out_dir)
        import csv

        with open(os.path.join(out_dir, "bench.csv"), "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)
    return rows
