"""YAML configuration: load, override, resolve into a ScenarioConfig.

A config names a scenario kind, a data table (CSV path or a synth
recipe), the battery, markets/sources/consumers by column, contracts,
and optimizer parameters.  Overrides use dotted paths into the mapping
(``battery.capacity_kwh=20``) with YAML-parsed values.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import yaml

from .contracts import Contract, PenaltyFn
from .entities import (
    BatteryConfig,
    ConsumerEntity,
    DegradationConfig,
    MarketEntity,
    MarketSchedule,
    SourceEntity,
)
from .environment import ObjectiveWeights
from .errors import ConfigInvalid
from .forecasting import ForecasterSpec
from .optimizers import QParams, SAParams
from .scenarios import ScenarioConfig
from .timeseries import Table, load_table
from . import synth

# markets in arbitrage scenarios do not take bids; any valid schedule works
_DEFAULT_SCHEDULE = dict(
    recurrence="daily",
    window_end="00:00",
    window_duration_min=60,
    n_slots=24,
    slot_duration_min=60,
    delivery_offset_min=0,
)


@dataclass(frozen=True)
class ResolvedConfig:
    scenario: ScenarioConfig
    sa_params: SAParams
    q_params: QParams
    n_days: int | None
    q_train_days: int | None
    out_dir: str
    raw: dict = field(repr=False, default_factory=dict)


def load_config_file(path: str) -> dict:
    # a missing config is a configuration problem (CLI exit 1), unlike a
    # missing data table, which load_table reports as MissingFile
    if not os.path.exists(path):
        raise ConfigInvalid(f"no such config: {path}")
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ConfigInvalid(f"{path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{path}: top level must be a mapping")
    return data


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    """Apply ``a.b.c=value`` assignments (values parsed as YAML)."""
    for item in overrides:
        if "=" not in item:
            raise ConfigInvalid(f"override {item!r} is not key=value")
        path, _, raw_value = item.partition("=")
        keys = [k for k in path.strip().split(".") if k]
        if not keys:
            raise ConfigInvalid(f"override {item!r} has an empty key path")
        try:
            value = yaml.safe_load(raw_value)
        except yaml.YAMLError:
            value = raw_value
        node = cfg
        for k in keys[:-1]:
            nxt = node.get(k)
            if nxt is None:
                nxt = {}
                node[k] = nxt
            if not isinstance(nxt, dict):
                raise ConfigInvalid(f"override {item!r}: {k!r} is not a mapping")
            node = nxt
        node[keys[-1]] = value
    return cfg


def _section(cfg: dict, name: str, default=None):
    v = cfg.get(name, default)
    if v is None:
        return default
    return v


def _load_data(cfg: dict, base_dir: str) -> Table:
    data = cfg.get("data")
    if not isinstance(data, dict):
        raise ConfigInvalid("config needs a data: section with table: or synth:")
    if "synth" in data and data["synth"]:
        spec = dict(data["synth"])
        kind = spec.pop("kind", None)
        makers = {
            "ea": synth.make_ea_table,
            "mg": synth.make_mg_table,
            "bo": synth.make_bo_table,
            "square": synth.make_square_price_table,
        }
        if kind not in makers:
            raise ConfigInvalid(f"unknown synth kind {kind!r}")
        try:
            return makers[kind](**spec)
        except TypeError as e:
            raise ConfigInvalid(f"bad synth spec: {e}") from None
    path = data.get("table")
    if not path:
        raise ConfigInvalid("data: section needs table: PATH or synth: {...}")
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    return load_table(path, data.get("granularity_min"))


def _battery(section: dict | None) -> BatteryConfig | None:
    if not section:
        return None
    s = dict(section)
    deg = s.pop("degradation", None) or {}
    try:
        return BatteryConfig(
            name=s.pop("name", "battery"),
            degradation=DegradationConfig(**deg),
            **s,
        )
    except TypeError as e:
        raise ConfigInvalid(f"battery: {e}") from None


def _schedule(section: dict | None) -> MarketSchedule:
    s = dict(_DEFAULT_SCHEDULE)
    if section:
        s.update(section)
    try:
        return MarketSchedule(**s)
    except TypeError as e:
        raise ConfigInvalid(f"schedule: {e}") from None


def _markets(cfg: dict, table: Table) -> tuple[MarketEntity, ...]:
    specs = cfg.get("markets")
    if specs is None:
        one = cfg.get("market")
        specs = [one] if one else []
    out = []
    for spec in specs:
        s = dict(spec)
        name = s.get("name", "grid")
        price = table.column(s["price_column"]) if "price_column" in s else table.column("price")
        carbon = table.column(s["carbon_column"]) if s.get("carbon_column") else None
        out.append(
            MarketEntity(
                name=name,
                schedule=_schedule(s.get("schedule")),
                price=price,
                carbon=carbon,
                dsm_rate_per_kwh=float(s.get("dsm_rate_per_kwh", 0.0)),
            )
        )
    return tuple(out)


def _sources(cfg: dict, table: Table) -> tuple[SourceEntity, ...]:
    out = []
    for spec in cfg.get("sources", []) or []:
        s = dict(spec)
        gen = table.column(s["column"])
        fc = table.column(s["forecast_column"]) if s.get("forecast_column") else None
        max_kw = float(s.get("max_capacity_kw", float(gen.values.max()) or 1.0))
        out.append(SourceEntity(name=s["name"], max_capacity_kw=max_kw, generation=gen, forecast=fc))
    return tuple(out)


def _consumers(cfg: dict, table: Table) -> tuple[ConsumerEntity, ...]:
    out = []
    for spec in cfg.get("consumers", []) or []:
        s = dict(spec)
        out.append(ConsumerEntity(name=s["name"], demand=table.column(s["column"])))
    return tuple(out)


def _contracts(cfg: dict) -> tuple[Contract, ...]:
    out = []
    for spec in cfg.get("contracts", []) or []:
        s = dict(spec)
        pen = s.get("penalty") or {}
        hours = pen.get("hours")
        out.append(
            Contract(
                contractor=s["contractor"],
                contractee=s["contractee"],
                penalty=PenaltyFn(
                    kind=pen.get("kind", "none"),
                    rate=float(pen.get("rate", 0.0)),
                    hours=tuple(hours) if hours else None,
                ),
            )
        )
    return tuple(out)


def resolve_config(cfg: dict, base_dir: str = ".") -> ResolvedConfig:
    """Turn a config mapping into resolved entities and parameters."""
    scen = _section(cfg, "scenario", {})
    if not isinstance(scen, dict) or "kind" not in scen:
        raise ConfigInvalid("config needs scenario.kind (ea, mg or bo)")
    table = _load_data(cfg, base_dir)

    weights = ObjectiveWeights(**(scen.get("weights") or {}))
    fc = scen.get("forecaster") or {}
    forecaster = ForecasterSpec(
        kind=fc.get("kind", "accurate"),
        sigma=float(fc.get("sigma", 0.0)),
        n_days=int(fc.get("n_days", 10)),
        seed=int(fc.get("seed", 0)),
    )
    scenario = ScenarioConfig(
        kind=scen["kind"],
        battery=_battery(cfg.get("battery")),
        markets=_markets(cfg, table),
        sources=_sources(cfg, table),
        consumers=_consumers(cfg, table),
        contracts=_contracts(cfg),
        weights=weights,
        forecaster=forecaster,
        price_scaling=scen.get("price_scaling", "raw"),
        allow_export=bool(scen.get("allow_export", False)),
        horizon=scen.get("horizon"),
        history_len=int(scen.get("history_len", 24)),
        # YAML 1.1 reads a bare `off` as False; authors mean the mode
        eod_mode="off" if scen.get("eod_mode") is False else scen.get("eod_mode", "mask"),
    )

    opt = _section(cfg, "optimizer", {}) or {}
    try:
        sa_params = SAParams(**(opt.get("sa") or {}))
        q_cfg = dict(opt.get("q") or {})
        q_train_days = q_cfg.pop("train_days", None)
        q_params = QParams(**q_cfg)
    except TypeError as e:
        raise ConfigInvalid(f"optimizer: {e}") from None

    run = _section(cfg, "run", {}) or {}
    n_days = scen.get("n_days")
    return ResolvedConfig(
        scenario=scenario,
        sa_params=sa_params,
        q_params=q_params,
        n_days=int(n_days) if n_days is not None else None,
        q_train_days=int(q_train_days) if q_train_days is not None else None,
        out_dir=run.get("out_dir", "out"),
        raw=cfg,
    )


def load_resolved(path: str, overrides: list[str] | None = None) -> ResolvedConfig:
    cfg = load_config_file(path)
    if overrides:
        apply_overrides(cfg, overrides)
    return resolve_config(cfg, base_dir=os.path.dirname(os.path.abspath(path)))


def with_seed(rc: ResolvedConfig, seed: int | None) -> ResolvedConfig:
    """Re-seed the stochastic pieces (sa, q, noise forecaster) in one go."""
    if seed is None:
        return rc
    scenario = rc.scenario
    if scenario.forecaster.kind == "noise":
        scenario = replace(scenario, forecaster=replace(scenario.forecaster, seed=seed))
    return ResolvedConfig(
        scenario=scenario,
        sa_params=replace(rc.sa_params, seed=seed),
        q_params=replace(rc.q_params, seed=seed),
        n_days=rc.n_days,
        q_train_days=rc.q_train_days,
        out_dir=rc.out_dir,
        raw=rc.raw,
    )
