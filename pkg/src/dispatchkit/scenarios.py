"""Scenario wiring: storage arbitrage (ea), microgrid (mg), market
bidding (bo).

A ScenarioConfig holds fully-resolved entities and options;
build_scenario turns it into an environment plus decision units.  The
microgrid dispatch rule and the bidding ledger live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np

from .contracts import (
    Contract,
    DecisionUnit,
    MarketDecision,
    PENALTY_NONE,
    PenaltyFn,
    build_decision_units,
    decision_slots,
    penalty_value,
)
from .entities import (
    BatteryAction,
    BatteryConfig,
    Commitment,
    ConsumerEntity,
    DELIVERED,
    MarketEntity,
    SCHEDULED,
    SourceEntity,
    battery_action_deltas,
)
from .environment import (
    Environment,
    NEG_INF,
    ObjectiveWeights,
    PlanningModel,
    RewardComponents,
)
from .errors import (
    ConfigInvalid,
    InsufficientData,
    MissedDeadline,
    UnresolvedCommitment,
)
from .forecasting import ForecasterSpec, forecast
from .timeseries import TimeSeries, Timestamp, scale_minmax

KIND_EA = "ea"
KIND_MG = "mg"
KIND_BO = "bo"

_KINDS = (KIND_EA, KIND_MG, KIND_BO)

SCALING_RAW = "raw"
SCALING_MINMAX = "minmax"


@dataclass(frozen=True)
class ScenarioConfig:
    """Resolved scenario: entities with their series attached."""

    kind: str
    battery: BatteryConfig | None = None
    markets: tuple[MarketEntity, ...] = ()
    sources: tuple[SourceEntity, ...] = ()
    consumers: tuple[ConsumerEntity, ...] = ()
    contracts: tuple[Contract, ...] = ()
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    forecaster: ForecasterSpec = field(default_factory=ForecasterSpec)
    price_scaling: str = SCALING_RAW
    allow_export: bool = False
    horizon: int | None = None
    history_len: int = 24
    eod_mode: str = "mask"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigInvalid(f"unknown scenario kind {self.kind!r}")
        if self.price_scaling not in (SCALING_RAW, SCALING_MINMAX):
            raise ConfigInvalid(f"unknown price scaling {self.price_scaling!r}")


@dataclass
class Scenario:
    config: ScenarioConfig
    env: Environment
    units: list[DecisionUnit]
    warmup_days: int


# -- microgrid dispatch ------------------------------------------------------


@dataclass(frozen=True)
class DispatchResult:
    """Energy bookkeeping for one microgrid step (all kWh).

    Merit order: local generation covers load first, then battery
    discharge, then grid import.  Battery charging adds to load.
    Surplus is exported only when the scenario allows it, otherwise
    curtailed as spill.
    """

    demand_kwh: float
    solar_kwh: float
    battery_grid_energy_kwh: float
    solar_used_kwh: float
    battery_to_load_kwh: float
    e_ugrid_kwh: float
    charge_load_kwh: float
    export_kwh: float
    spill_kwh: float

    def balance_residual(self) -> float:
        """solar + discharge + import - demand - charge - export - spill;
        zero up to float error when the dispatch is consistent."""
        discharge = max(0.0, self.battery_grid_energy_kwh)
        return (
            self.solar_kwh
            + discharge
            + self.e_ugrid_kwh
            - self.demand_kwh
            - self.charge_load_kwh
            - self.export_kwh
            - self.spill_kwh
        )


def mg_dispatch(
    demand_kwh: float,
    solar_kwh: float,
    battery_grid_energy_kwh: float,
    allow_export: bool = False,
) -> DispatchResult:
    """Greedy merit-order dispatch for one step.

    Grid import is max(0, demand + charge - solar - discharge); it never
    goes negative, so with allow_export=False surplus is curtailed.
    """
    discharge = max(0.0, battery_grid_energy_kwh)
    charge_load = max(0.0, -battery_grid_energy_kwh)
    load = demand_kwh + charge_load
    solar_used = min(solar_kwh, load)
    residual = load - solar_used
    battery_to_load = min(discharge, residual)
    e_ugrid = residual - battery_to_load
    surplus = (solar_kwh - solar_used) + (discharge - battery_to_load)
    export = surplus if allow_export else 0.0
    spill = 0.0 if allow_export else surplus
    return DispatchResult(
        demand_kwh=demand_kwh,
        solar_kwh=solar_kwh,
        battery_grid_energy_kwh=battery_grid_energy_kwh,
        solar_used_kwh=solar_used,
        battery_to_load_kwh=battery_to_load,
        e_ugrid_kwh=e_ugrid,
        charge_load_kwh=charge_load,
        export_kwh=export,
        spill_kwh=spill,
    )


def mg_reward(price: float, e_ugrid_kwh: float, export_kwh: float = 0.0) -> float:
    """Money flow for one microgrid step: imports pay, exports earn."""
    return price * export_kwh - price * e_ugrid_kwh


class MicrogridEnvironment(Environment):
    """Battery + local generation serving local demand behind one meter."""

    scenario_kind = "mg"

    def __init__(self, *, solar: TimeSeries, demand: TimeSeries,
                 solar_forecast: TimeSeries | None = None,
                 demand_forecast: TimeSeries | None = None,
                 allow_export: bool = False, **kwargs):
        super().__init__(**kwargs)
        for name, series in (("solar", solar), ("demand", demand)):
            if series.granularity_min != self.price.granularity_min or series.start != self.price.start or len(series) != len(self.price):
                raise ConfigInvalid(f"{name} series must match the price grid")
        self.solar = solar
        self.demand = demand
        self.solar_forecast = solar_forecast
        self.demand_forecast = demand_forecast
        self.allow_export = allow_export
        self.last_dispatch: DispatchResult | None = None

    def spawn(self, begin: int, n_steps: int) -> "MicrogridEnvironment":
        return MicrogridEnvironment(
            solar=self.solar,
            demand=self.demand,
            solar_forecast=self.solar_forecast,
            demand_forecast=self.demand_forecast,
            allow_export=self.allow_export,
            battery=self.battery_cfg,
            price=self.price,
            carbon=self.carbon,
            weights=self.weights,
            forecaster=self.forecaster,
            price_forecast=self.price_forecast,
            begin=begin,
            n_steps=n_steps,
            history_len=self.history_len,
            eod_mode=self.eod_mode,
        )

    def _realized(self, t_abs, action, grid_energy_kwh, alpha):
        d = mg_dispatch(
            demand_kwh=float(self.demand.values[t_abs]) * self.dt_h,
            solar_kwh=float(self.solar.values[t_abs]) * self.dt_h,
            battery_grid_energy_kwh=grid_energy_kwh,
            allow_export=self.allow_export,
        )
        self.last_dispatch = d
        r_price = mg_reward(float(self.price.values[t_abs]), d.e_ugrid_kwh, d.export_kwh)
        r_deg = alpha * abs(grid_energy_kwh)
        return RewardComponents.combine(self.weights, r_price, 0.0, r_deg)

    def _planning_tables(self, t0, horizon):
        prices = self._forecast_series(self.price, self.price_forecast, t0, horizon)
        solar = self._forecast_series(self.solar, self.solar_forecast, t0, horizon)
        demand = self._forecast_series(self.demand, self.demand_forecast, t0, horizon)
        _, energies = battery_action_deltas(self.battery_cfg, self.battery, self.dt_h)
        alpha = self.battery.deg_cost_per_kwh
        w = self.weights
        out = np.empty((horizon, 3))
        for t in range(horizon):
            for a in range(3):
                d = mg_dispatch(
                    demand_kwh=max(0.0, float(demand[t])) * self.dt_h,
                    solar_kwh=max(0.0, float(solar[t])) * self.dt_h,
                    battery_grid_energy_kwh=energies[a],
                    allow_export=self.allow_export,
                )
                r_price = mg_reward(float(prices[t]), d.e_ugrid_kwh, d.export_kwh)
                r_deg = alpha * abs(energies[a])
                out[t, a] = w.net(r_price, 0.0, r_deg)
        return out


# -- bidding -----------------------------------------------------------------


@dataclass(frozen=True)
class Bid:
    market: str
    slot_start: Timestamp
    volume_kwh: float
    price: float
    deadline: Timestamp


@dataclass
class Settlement:
    """Per-day ledger roll-up for the bidding scenario."""

    day_index: int
    revenue: float
    dsm_penalty: float
    contract_penalty: float
    delivered_kwh: float
    committed_kwh: float

    @property
    def profit(self) -> float:
        return self.revenue - self.dsm_penalty - self.contract_penalty


class BiddingEnvironment(Environment):
    """Generation portfolio bidding into slot markets under a ledger.

    Bids fire at market deadlines via due_bids(); execution follows the
    battery fragments planned at bid time, delivery allocates actual
    generation (consumer first, then commitments by deadline order) and
    deviation is priced at the market's dsm rate.  Contract penalties
    accrue to each day's final step.
    """

    scenario_kind = "bo"

    def __init__(self, *, unit: DecisionUnit, gen_total: TimeSeries,
                 gen_forecast: TimeSeries | None,
                 demand_total: TimeSeries | None,
                 demand_forecast: TimeSeries | None,
                 weights: ObjectiveWeights, forecaster: ForecasterSpec,
                 begin: int = 0, n_steps: int | None = None,
                 history_len: int = 24, eod_mode: str = "off"):
        markets = unit.markets
        if not markets:
            raise ConfigInvalid("bidding scenario needs at least one market")
        batteries = unit.batteries
        if len(batteries) > 1:
            raise ConfigInvalid("at most one battery per bidding unit")
        primary = markets[0]
        for m in markets:
            if m.schedule.slot_duration_min != primary.price.granularity_min:
                raise ConfigInvalid(
                    f"market {m.name}: slot duration must equal the data granularity"
                )
        battery = batteries[0] if batteries else _PASSIVE_BATTERY
        super().__init__(
            battery=battery,
            price=primary.price,
            weights=weights,
            forecaster=forecaster,
            begin=begin,
            n_steps=n_steps,
            history_len=history_len,
            eod_mode=eod_mode,
        )
        self.unit = unit
        self.has_battery = bool(batteries)
        self.gen_total = gen_total
        self.gen_forecast = gen_forecast
        self.demand_total = demand_total
        self.demand_forecast = demand_forecast
        self.deliverable_cap_kwh = (
            sum(s.max_capacity_kw for s in unit.sources) * self.dt_h
            + (battery.pmax_discharge_kw * self.dt_h if batteries else 0.0)
        )
        self._fired: set[tuple[str, Timestamp]] = set()
        self._fragments: dict[int, BatteryAction] = {}
        self._committed_by_slot: dict[Timestamp, float] = {}
        self._by_slot: dict[Timestamp, list[Commitment]] = {}
        self._consumer_supplied: list[float] = []
        self._consumer_demand: list[float] = []
        self._dsm_by_day: dict[int, float] = {}
        self._contract_by_day: dict[int, float] = {}
        self.decision_log: list[tuple[Timestamp, str, int]] = []
        self.settlements: list[Settlement] = []

    def spawn(self, begin: int, n_steps: int) -> "Environment":
        raise ConfigInvalid("bidding environments carry ledger state and cannot be sliced")

    # -- bid planning ------------------------------------------------------

    def _index_of_slot(self, slot: Timestamp) -> int:
        return self.price.index_of(slot)

    def _forecast_gen_kwh(self, t0: int, horizon: int) -> np.ndarray:
        kw = forecast(self.forecaster, self.gen_total, t0, horizon, provided=self.gen_forecast)
        return np.maximum(0.0, kw) * self.dt_h

    def _forecast_demand_kwh(self, t0: int, horizon: int) -> np.ndarray:
        if self.demand_total is None:
            return np.zeros(horizon)
        kw = forecast(self.forecaster, self.demand_total, t0, horizon, provided=self.demand_forecast)
        return np.maximum(0.0, kw) * self.dt_h

    def _plan_battery(self, market: MarketEntity, i0: int, horizon: int) -> list[float]:
        """Plan battery flow over [i0, i0+horizon) against market prices;
        stores action fragments, returns per-slot signed energy."""
        if not self.has_battery:
            return [0.0] * horizon
        prices = forecast(self.forecaster, market.price, i0, horizon)
        deltas, energies = battery_action_deltas(self.battery_cfg, self.battery, self.dt_h)
        alpha = self.battery.deg_cost_per_kwh
        w = self.weights
        e = np.asarray(energies)
        rewards = w.w_price * (prices[:, None] * e[None, :]) - w.w_deg * (alpha * np.abs(e)[None, :])
        ends_day = (i0 + horizon) % self.spd == 0
        end_min = self.battery_cfg.min_soc_end if ends_day else NEG_INF
        model = PlanningModel(
            rewards=rewards,
            deltas=tuple(deltas),
            energies=tuple(energies),
            soc0=self.battery.soc,
            soc_lo=self.battery_cfg.soc_floor,
            soc_hi=self.battery_cfg.soc_max,
            end_min=end_min,
            t0=i0,
            dt_h=self.dt_h,
        )
        from .optimizers import solve_exact

        try:
            plan = solve_exact(model)
        except Exception:
            return [0.0] * horizon
        for k, action in enumerate(plan.actions):
            self._fragments[i0 + k] = action
        return [energies[int(a)] for a in plan.actions]

    def due_bids(self) -> tuple[list[MarketDecision], list[Bid]]:
        """Decisions whose deadline is exactly now, with the bids they
        produce.  Idempotent per (market, deadline)."""
        now = self.now
        decisions = [
            d for d in decision_slots(self.unit, now)
            if d.info.deadline == now and (d.market.name, now) not in self._fired
        ]
        bids: list[Bid] = []
        for d in decisions:
            self._fired.add((d.market.name, now))
            self.decision_log.append((now, d.market.name, len(d.slots)))
            in_range = [
                s for s in d.slots
                if self.begin <= self._safe_index(s) < self.end
            ]
            if not in_range:
                continue
            # plan over the contiguous span covering all kept slots;
            # claimed holes simply get no bid
            i0 = self._index_of_slot(in_range[0])
            span = self._index_of_slot(in_range[-1]) - i0 + 1
            batt_e = self._plan_battery(d.market, i0, span)
            gen = self._forecast_gen_kwh(i0, span)
            dem = self._forecast_demand_kwh(i0, span)
            prices = forecast(self.forecaster, d.market.price, i0, span)
            for slot in in_range:
                k = self._index_of_slot(slot) - i0
                prior = self._committed_by_slot.get(slot, 0.0)
                headroom = self.deliverable_cap_kwh - prior
                volume = min(max(0.0, gen[k] + batt_e[k] - dem[k] - prior), max(0.0, headroom))
                if volume <= 0.0:
                    continue
                bids.append(Bid(
                    market=d.market.name,
                    slot_start=slot,
                    volume_kwh=float(volume),
                    price=float(prices[k]),
                    deadline=now,
                ))
        return decisions, bids

    def _safe_index(self, slot: Timestamp) -> int:
        delta = slot - self.price.start
        return int(delta // timedelta(minutes=self.price.granularity_min))

    def preferred_action(self) -> BatteryAction:
        """Execute the battery fragment planned at bid time, idle else."""
        action = self._fragments.get(self._cursor, BatteryAction.IDLE)
        if action not in self.feasible_actions():
            return BatteryAction.IDLE
        return action

    # -- stepping ----------------------------------------------------------

    def _commit(self, bid: Bid) -> None:
        market = next((m for m in self.unit.markets if m.name == bid.market), None)
        if market is None:
            raise ConfigInvalid(f"bid references unknown market {bid.market!r}")
        info_deadline = bid.deadline
        if info_deadline != self.now:
            raise MissedDeadline(
                f"bid for {bid.market} placed at {self.now}, deadline was {info_deadline}"
            )
        for existing in self._by_slot.get(bid.slot_start, []):
            if existing.market == bid.market:
                raise ConfigInvalid(
                    f"{bid.market} already committed for slot {bid.slot_start}"
                )
        c = Commitment(
            market=bid.market,
            slot_start=bid.slot_start,
            slot_minutes=self.price.granularity_min,
            volume_kwh=bid.volume_kwh,
            price=bid.price,
            deadline=bid.deadline,
        )
        self.commitments.append(c)
        self._by_slot.setdefault(bid.slot_start, []).append(c)
        self._committed_by_slot[bid.slot_start] = (
            self._committed_by_slot.get(bid.slot_start, 0.0) + bid.volume_kwh
        )

    def step(self, action: BatteryAction, bids: list[Bid] | None = None):
        if bids:
            for bid in bids:
                self._commit(bid)
        # run the shared battery/reward machinery with bids consumed
        return super().step(action, None)

    def _realized(self, t_abs, action, grid_energy_kwh, alpha):
        now = self.price.timestamp_at(t_abs)
        day = t_abs // self.spd
        pool = float(self.gen_total.values[t_abs]) * self.dt_h + grid_energy_kwh
        pool = max(0.0, pool)
        demand = (
            float(self.demand_total.values[t_abs]) * self.dt_h
            if self.demand_total is not None
            else 0.0
        )
        to_consumer = min(pool, demand)
        pool -= to_consumer
        self._consumer_supplied.append(to_consumer)
        self._consumer_demand.append(demand)

        revenue = 0.0
        dsm = 0.0
        due = sorted(self._by_slot.get(now, []), key=lambda c: (c.deadline, c.market))
        price_of = {m.name: float(m.price.values[t_abs]) for m in self.unit.markets}
        dsm_of = {m.name: m.dsm_rate_per_kwh for m in self.unit.markets}
        for c in due:
            c.advance(SCHEDULED)
            delivered = min(c.volume_kwh, pool)
            pool -= delivered
            c.advance(DELIVERED, delivered_kwh=delivered)
            revenue += delivered * price_of[c.market]
            dsm += dsm_of[c.market] * abs(delivered - c.volume_kwh)
        self._dsm_by_day[day] = self._dsm_by_day.get(day, 0.0) + dsm

        r_price = revenue - dsm
        if (t_abs + 1) % self.spd == 0:
            contract_pen = self._day_contract_penalty(day)
            self._contract_by_day[day] = contract_pen
            r_price -= contract_pen
            self.settlements.append(self._settle_day(day))
        r_deg = alpha * abs(grid_energy_kwh)
        return RewardComponents.combine(self.weights, r_price, 0.0, r_deg)

    def _day_contract_penalty(self, day: int) -> float:
        consumers = {c.name for c in self.unit.consumers}
        total = 0.0
        lo = day * self.spd - self.begin
        hi = lo + self.spd
        supplied = np.asarray(self._consumer_supplied[lo:hi])
        demanded = np.asarray(self._consumer_demand[lo:hi])
        for contract in self.unit.contracts:
            if contract.contractee in consumers and contract.penalty.kind != PENALTY_NONE:
                total += penalty_value(contract.penalty, supplied, demanded, self.spd)
        return total

    def _settle_day(self, day: int) -> Settlement:
        day_start = self.price.timestamp_at(day * self.spd)
        day_end = day_start + timedelta(days=1)
        revenue = 0.0
        delivered = 0.0
        committed = 0.0
        for c in self.commitments:
            if day_start <= c.slot_start < day_end:
                if c.status != DELIVERED:
                    raise UnresolvedCommitment(f"unsettled: {c.describe()}")
                t = self._index_of_slot(c.slot_start)
                market = next(m for m in self.unit.markets if m.name == c.market)
                revenue += c.delivered_kwh * float(market.price.values[t])
                delivered += c.delivered_kwh
                committed += c.volume_kwh
        return Settlement(
            day_index=day,
            revenue=revenue,
            dsm_penalty=self._dsm_by_day.get(day, 0.0),
            contract_penalty=self._contract_by_day.get(day, 0.0),
            delivered_kwh=delivered,
            committed_kwh=committed,
        )

    def _planning_tables(self, t0, horizon):
        # battery value against the primary market when a driver asks
        prices = forecast(self.forecaster, self.price, t0, horizon)
        _, energies = battery_action_deltas(self.battery_cfg, self.battery, self.dt_h)
        alpha = self.battery.deg_cost_per_kwh
        e = np.asarray(energies)
        w = self.weights
        return w.w_price * (prices[:, None] * e[None, :]) - w.w_deg * (alpha * np.abs(e)[None, :])


def bo_settle(env: BiddingEnvironment, day_index: int) -> Settlement:
    """Recompute a day's settlement straight from the ledger; raises
    UnresolvedCommitment if the day has undelivered commitments."""
    return env._settle_day(day_index)


# A bidding unit may have no battery; a zero-power stand-in keeps the
# shared stepping machinery uniform (only IDLE is ever feasible).
_PASSIVE_BATTERY = BatteryConfig(
    name="_passive",
    capacity_kwh=1.0,
    pmax_charge_kw=0.0,
    pmax_discharge_kw=0.0,
)


# -- building ----------------------------------------------------------------


def _sum_series(series_list: list[TimeSeries]) -> TimeSeries:
    base = series_list[0]
    total = np.zeros(len(base))
    for s in series_list:
        if s.granularity_min != base.granularity_min or s.start != base.start or len(s) != len(base):
            raise ConfigInvalid("series being combined live on different grids")
        total = total + s.values
    return base.with_values(total)


def _combined_forecast(entities, forecast_attr: str = "forecast") -> TimeSeries | None:
    provided = [getattr(e, forecast_attr) for e in entities]
    if all(p is not None for p in provided) and provided:
        return _sum_series(provided)
    return None


def _auto_contracts(cfg: ScenarioConfig) -> tuple[Contract, ...]:
    """Wire every entity to one hub so the unit graph is connected."""
    if cfg.contracts:
        return cfg.contracts
    names = [e.name for e in (*cfg.sources, *cfg.consumers, *([cfg.battery] if cfg.battery else []))]
    hub = cfg.markets[0].name if cfg.markets else (names[0] if names else None)
    if hub is None:
        raise ConfigInvalid("scenario has no entities to wire")
    contracts = [
        Contract(contractor=n, contractee=hub, penalty=PenaltyFn())
        for n in names
        if n != hub
    ]
    extra_markets = [m.name for m in cfg.markets[1:]]
    contracts.extend(
        Contract(contractor=names[0] if names else hub, contractee=m) for m in extra_markets
    )
    return tuple(contracts)


def build_scenario(cfg: ScenarioConfig, n_days: int | None = None) -> Scenario:
    """Materialize the environment and decision units for a config.

    Forecasters that need history push the start forward by whole
    warm-up days; n_days then counts decided days after warm-up.
    """
    contracts = _auto_contracts(cfg)
    entities = [*cfg.markets, *cfg.sources, *cfg.consumers]
    if cfg.battery is not None:
        entities.append(cfg.battery)
    units = build_decision_units(entities, list(contracts))

    if cfg.kind in (KIND_EA, KIND_MG):
        if cfg.battery is None or not cfg.markets:
            raise ConfigInvalid(f"{cfg.kind} scenario needs a battery and a market")
        market = cfg.markets[0]
        price = market.price
        if cfg.price_scaling == SCALING_MINMAX:
            price, _ = scale_minmax(price, -1.0, 1.0)
        spd = price.steps_per_day
        warmup = cfg.forecaster.min_history_days
        total_days = len(price) // spd
        avail = total_days - warmup
        if avail < 1:
            raise InsufficientData(
                f"data holds {total_days} days, warm-up needs {warmup}, nothing left to run"
            )
        run_days = avail if n_days is None else n_days
        if run_days < 1 or run_days > avail:
            raise InsufficientData(f"n_days {n_days} exceeds available {avail}")
        common = dict(
            battery=cfg.battery,
            price=price,
            weights=cfg.weights,
            forecaster=cfg.forecaster,
            begin=warmup * spd,
            n_steps=run_days * spd,
            history_len=cfg.history_len,
            eod_mode=cfg.eod_mode,
        )
        if cfg.kind == KIND_EA:
            env = Environment(carbon=market.carbon, **common)
        else:
            if not cfg.sources or not cfg.consumers:
                raise ConfigInvalid("mg scenario needs a source and a consumer")
            env = MicrogridEnvironment(
                solar=_sum_series([s.generation for s in cfg.sources]),
                demand=_sum_series([c.demand for c in cfg.consumers]),
                solar_forecast=_combined_forecast(cfg.sources),
                demand_forecast=None,
                allow_export=cfg.allow_export,
                **common,
            )
        return Scenario(config=cfg, env=env, units=units, warmup_days=warmup)

    # bidding
    if not cfg.sources:
        raise ConfigInvalid("bo scenario needs at least one source")
    unit = next((u for u in units if u.markets), None)
    if unit is None:
        raise ConfigInvalid("bo scenario has no unit containing a market")
    price = unit.markets[0].price
    spd = price.steps_per_day
    warmup = cfg.forecaster.min_history_days
    total_days = len(price) // spd
    avail = total_days - warmup
    if avail < 1:
        raise InsufficientData(f"{total_days} days of data, warm-up needs {warmup}")
    run_days = avail if n_days is None else n_days
    if run_days < 1 or run_days > avail:
        raise InsufficientData(f"n_days {n_days} exceeds available {avail}")
    env = BiddingEnvironment(
        unit=unit,
        gen_total=_sum_series([s.generation for s in unit.sources]),
        gen_forecast=_combined_forecast(unit.sources),
        demand_total=_sum_series([c.demand for c in unit.consumers]) if unit.consumers else None,
        demand_forecast=None,
        weights=cfg.weights,
        forecaster=cfg.forecaster,
        begin=warmup * spd,
        n_steps=run_days * spd,
        history_len=cfg.history_len,
    )
    return Scenario(config=cfg, env=env, units=units, warmup_days=warmup)
