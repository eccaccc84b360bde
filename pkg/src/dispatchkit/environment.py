"""Stepped decision environments and the reward algebra they share.

An environment walks a data range one step at a time: validate the
action, move the battery, price the step on actual data, close
degradation windows on schedule.  Planning is kept strictly separate:
``planning_model`` builds a per-step/per-action reward table from
*forecast* data for the solvers, while ``step`` always settles on
actuals.

The weighted reward identity used everywhere:
    r_net = w_carbon * r_carbon + w_price * r_price - w_deg * r_deg
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .contracts import DecisionUnit
from .entities import (
    BatteryAction,
    BatteryConfig,
    BatteryState,
    Commitment,
    battery_action_deltas,
    battery_apply_action,
    battery_close_degradation_window,
    battery_feasible_actions,
)
from .errors import (
    ConfigInvalid,
    InfeasibleAction,
    LengthMismatch,
    MissingVariable,
    OutOfRange,
)
from .forecasting import ForecasterSpec, forecast
from .timeseries import TimeSeries, Timestamp

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ObjectiveWeights:
    """Non-negative scalarization weights for the three reward channels."""

    w_price: float = 1.0
    w_carbon: float = 0.0
    w_deg: float = 0.0

    def __post_init__(self):
        if self.w_price < 0 or self.w_carbon < 0 or self.w_deg < 0:
            raise ConfigInvalid("objective weights must be >= 0")

    def net(self, r_price: float, r_carbon: float, r_deg: float) -> float:
        return self.w_carbon * r_carbon + self.w_price * r_price - self.w_deg * r_deg


@dataclass(frozen=True)
class RewardComponents:
    r_price: float
    r_carbon: float
    r_deg: float
    r_net: float

    @staticmethod
    def combine(weights: ObjectiveWeights, r_price: float, r_carbon: float, r_deg: float) -> "RewardComponents":
        return RewardComponents(
            r_price=r_price,
            r_carbon=r_carbon,
            r_deg=r_deg,
            r_net=weights.net(r_price, r_carbon, r_deg),
        )

    @staticmethod
    def zero() -> "RewardComponents":
        return RewardComponents(0.0, 0.0, 0.0, 0.0)


def reward_components(
    weights: ObjectiveWeights,
    price: float,
    carbon: float,
    deg_cost_per_kwh: float,
    grid_energy_kwh: float,
) -> RewardComponents:
    """Price one step of signed grid energy.

    Positive grid energy (discharge) earns price * energy; negative
    (charge) pays it.  Degradation charges on absolute throughput.
    """
    r_price = price * grid_energy_kwh
    r_carbon = carbon * grid_energy_kwh
    r_deg = deg_cost_per_kwh * abs(grid_energy_kwh)
    return RewardComponents.combine(weights, r_price, r_carbon, r_deg)


# -- composition over decision units --------------------------------------


@dataclass
class FormulationVars:
    """Per-slot decision variables for one decision unit.

    vout:      entity name -> energy pushed out per slot (kWh)
    committed: contract key -> committed volume per slot (kWh)
    supplied:  contract key -> actually supplied volume per slot (kWh)
    """

    vout: dict[str, np.ndarray] = field(default_factory=dict)
    committed: dict[str, np.ndarray] = field(default_factory=dict)
    supplied: dict[str, np.ndarray] = field(default_factory=dict)


def compose_revenue(
    unit: DecisionUnit, vars: FormulationVars, prices: dict[str, np.ndarray]
) -> np.ndarray:
    """Per-slot revenue: each market contract pays its contractor's
    outflow at the market price."""
    market_names = {m.name for m in unit.markets}
    out: np.ndarray | None = None
    for c in unit.contracts:
        if c.contractee not in market_names:
            continue
        if c.contractor not in vars.vout:
            raise MissingVariable(f"no vout for {c.contractor!r} (contract {c.key})")
        if c.contractee not in prices:
            raise MissingVariable(f"no price vector for market {c.contractee!r}")
        v = np.asarray(vars.vout[c.contractor], dtype=np.float64)
        p = np.asarray(prices[c.contractee], dtype=np.float64)
        if v.shape != p.shape:
            raise LengthMismatch(f"{c.key}: vout {v.shape} vs price {p.shape}")
        term = v * p
        out = term if out is None else out + term
    if out is None:
        raise MissingVariable(f"unit {unit.name!r} has no market contracts")
    return out


def compose_penalty(unit: DecisionUnit, vars: FormulationVars, steps_per_day: int | None = None) -> float:
    """Total contract shortfall penalty across the unit."""
    from .contracts import PENALTY_NONE, penalty_value

    total = 0.0
    for c in unit.contracts:
        if c.penalty.kind == PENALTY_NONE:
            continue
        if c.key not in vars.committed:
            raise MissingVariable(f"no committed volumes for contract {c.key}")
        if c.key not in vars.supplied:
            raise MissingVariable(f"no supplied volumes for contract {c.key}")
        total += penalty_value(
            c.penalty, vars.supplied[c.key], vars.committed[c.key], steps_per_day
        )
    return total


# -- environment ------------------------------------------------------------


@dataclass
class EnvState:
    """Observable snapshot handed to policies after each step."""

    t: int
    now: Timestamp
    battery: BatteryState | None
    feasible: tuple[BatteryAction, ...]
    price_slope_sign: int
    day_index: int
    step_in_day: int
    history: deque
    commitments: list[Commitment] = field(default_factory=list)


@dataclass(frozen=True)
class PlanningModel:
    """Everything a solver needs: forecast reward table plus kinematics.

    rewards[h][action] is the weighted net reward for taking ``action``
    at offset h; deltas/energies are the per-action soc drop and signed
    grid energy, frozen at build time.
    """

    rewards: np.ndarray
    deltas: tuple[float, float, float]
    energies: tuple[float, float, float]
    soc0: float
    soc_lo: float
    soc_hi: float
    end_min: float
    t0: int
    dt_h: float

    @property
    def horizon(self) -> int:
        return int(self.rewards.shape[0])


_EOD_MODES = ("mask", "off")


class Environment:
    """Grid-connected battery arbitrage over price (and carbon) series.

    The data range is split into calendar days; ``min_soc_end`` is
    enforced by masking on each day's final step (eod_mode="mask") or
    ignored (eod_mode="off").  Batteries carry state across days.
    """

    scenario_kind = "ea"

    def __init__(
        self,
        *,
        battery: BatteryConfig,
        price: TimeSeries,
        carbon: TimeSeries | None = None,
        weights: ObjectiveWeights | None = None,
        forecaster: ForecasterSpec | None = None,
        price_forecast: TimeSeries | None = None,
        begin: int = 0,
        n_steps: int | None = None,
        history_len: int = 24,
        eod_mode: str = "mask",
    ):
        if price.start.hour != 0 or price.start.minute != 0:
            raise ConfigInvalid("series must start at midnight for day-based scheduling")
        if carbon is not None and (
            carbon.granularity_min != price.granularity_min
            or carbon.start != price.start
            or len(carbon) != len(price)
        ):
            raise ConfigInvalid("carbon series must match the price grid")
        if eod_mode not in _EOD_MODES:
            raise ConfigInvalid(f"eod_mode must be one of {_EOD_MODES}")
        self.battery_cfg = battery
        self.price = price
        self.carbon = carbon
        self.weights = weights or ObjectiveWeights()
        self.forecaster = forecaster or ForecasterSpec()
        self.price_forecast = price_forecast
        self.eod_mode = eod_mode
        self.spd = price.steps_per_day
        self.dt_h = price.granularity_min / 60.0
        self.history_len = history_len

        if begin % self.spd != 0:
            raise ConfigInvalid("begin must sit on a day boundary")
        max_steps = len(price) - begin
        self.begin = begin
        self.n_steps = max_steps if n_steps is None else n_steps
        if self.n_steps <= 0 or self.n_steps > max_steps:
            raise OutOfRange(f"n_steps {n_steps} outside data range")
        if self.n_steps % self.spd != 0:
            raise ConfigInvalid("run length must be whole days")

        deg_window = battery.degradation.window_steps
        self._deg_window = deg_window if deg_window > 0 else self.spd
        self.reset()

    # -- lifecycle ---------------------------------------------------------

    def reset(self) -> EnvState:
        self._cursor = self.begin
        self.battery = BatteryState.initial(self.battery_cfg)
        self.history: deque = deque(maxlen=self.history_len)
        self.commitments: list[Commitment] = []
        self._day_fc: np.ndarray | None = None
        self._day_fc_day = -1
        return self.state()

    def spawn(self, begin: int, n_steps: int) -> "Environment":
        """Fresh environment over a sub-range of the same data.

        Used to carve single training days out of a run; the clone
        starts from the configured initial battery state.
        """
        return Environment(
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

    @property
    def t(self) -> int:
        """Steps taken since the start of the run."""
        return self._cursor - self.begin

    @property
    def end(self) -> int:
        return self.begin + self.n_steps

    @property
    def done(self) -> bool:
        return self._cursor >= self.end

    @property
    def now(self) -> Timestamp:
        return self.price.timestamp_at(self._cursor)

    @property
    def day_index(self) -> int:
        return self._cursor // self.spd

    @property
    def step_in_day(self) -> int:
        return self._cursor % self.spd

    @property
    def steps_to_day_end(self) -> int:
        return self.spd - self.step_in_day

    # -- observation --------------------------------------------------------

    def _eod_min_soc(self) -> float | None:
        last_of_day = self.step_in_day == self.spd - 1
        if last_of_day and self.eod_mode == "mask":
            return self.battery_cfg.min_soc_end
        return None

    def feasible_actions(self) -> tuple[BatteryAction, ...]:
        """Bound-respecting actions; the end-of-day floor joins in on a
        day's last step unless that would empty the set."""
        feas = battery_feasible_actions(
            self.battery_cfg, self.battery, self.dt_h, self._eod_min_soc()
        )
        if not feas:
            feas = battery_feasible_actions(self.battery_cfg, self.battery, self.dt_h)
        return feas

    def day_forecast(self) -> np.ndarray:
        """Forecast price curve for the current day (cached per day)."""
        day = self.day_index
        if self._day_fc_day != day:
            t0 = day * self.spd
            self._day_fc = self._forecast_series(self.price, self.price_forecast, t0, self.spd)
            self._day_fc_day = day
        return self._day_fc

    def price_slope_sign(self) -> int:
        if self.done:
            return 0
        fc = self.day_forecast()
        i = self.step_in_day
        if i + 1 >= len(fc):
            return 0
        diff = float(fc[i + 1] - fc[i])
        return (diff > 0) - (diff < 0)

    def state(self) -> EnvState:
        return EnvState(
            t=self.t,
            now=self.price.timestamp_at(min(self._cursor, len(self.price) - 1)),
            battery=self.battery,
            feasible=self.feasible_actions() if not self.done else (),
            price_slope_sign=self.price_slope_sign(),
            day_index=self.day_index,
            step_in_day=self.step_in_day,
            history=self.history,
            commitments=self.commitments,
        )

    # -- stepping -----------------------------------------------------------

    def _realized(self, t_abs: int, action: BatteryAction, grid_energy_kwh: float, alpha: float) -> RewardComponents:
        price = float(self.price.values[t_abs])
        carbon = 0.0 if self.carbon is None else float(self.carbon.values[t_abs])
        return reward_components(self.weights, price, carbon, alpha, grid_energy_kwh)

    def step(self, action: BatteryAction, bids=None) -> tuple[EnvState, RewardComponents, bool, bool]:
        """Advance one step.  Returns (state, reward, day_done, run_done)."""
        if self.done:
            raise OutOfRange("environment already ran to the end of its range")
        if bids:
            raise ConfigInvalid(f"{self.scenario_kind} scenario takes no bids")
        if action not in self.feasible_actions():
            raise InfeasibleAction(
                f"{action.name} not feasible at t={self.t} (soc={self.battery.soc:.4f})"
            )
        t_abs = self._cursor
        alpha = self.battery.deg_cost_per_kwh
        self.battery, grid_e = battery_apply_action(self.battery_cfg, self.battery, action, self.dt_h)
        rc = self._realized(t_abs, action, grid_e, alpha)
        self._observe(t_abs, action, grid_e, rc)
        if (t_abs + 1) % self._deg_window == 0:
            self.battery = battery_close_degradation_window(self.battery_cfg, self.battery)
        self._cursor += 1
        day_done = self._cursor % self.spd == 0
        return self.state(), rc, day_done, self.done

    def _observe(self, t_abs: int, action: BatteryAction, grid_e: float, rc: RewardComponents) -> None:
        self.history.append(
            {
                "t": t_abs - self.begin,
                "price": float(self.price.values[t_abs]),
                "carbon": 0.0 if self.carbon is None else float(self.carbon.values[t_abs]),
                "action": action.name,
                "grid_energy_kwh": grid_e,
                "soc": self.battery.soc,
                "r_net": rc.r_net,
            }
        )

    # -- planning -----------------------------------------------------------

    def _forecast_series(
        self, series: TimeSeries, provided: TimeSeries | None, t0: int, horizon: int
    ) -> np.ndarray:
        return forecast(self.forecaster, series, t0, horizon, provided=provided)

    def _planning_tables(self, t0: int, horizon: int) -> np.ndarray:
        """Weighted per-action reward table from forecast data."""
        prices = self._forecast_series(self.price, self.price_forecast, t0, horizon)
        if self.carbon is not None:
            carbons = self._forecast_series(self.carbon, None, t0, horizon)
        else:
            carbons = np.zeros(horizon)
        _, energies = battery_action_deltas(self.battery_cfg, self.battery, self.dt_h)
        alpha = self.battery.deg_cost_per_kwh
        e = np.asarray(energies)
        r_price = prices[:, None] * e[None, :]
        r_carbon = carbons[:, None] * e[None, :]
        r_deg = alpha * np.abs(e)[None, :]
        w = self.weights
        return w.w_carbon * r_carbon + w.w_price * r_price - w.w_deg * r_deg

    def planning_model(self, horizon: int | None = None) -> PlanningModel:
        """Model for the next ``horizon`` steps, clipped to the current
        day so the end-of-day floor can sit on the model's last step."""
        if self.done:
            raise OutOfRange("nothing left to plan")
        h = self.steps_to_day_end if horizon is None else min(horizon, self.steps_to_day_end)
        if h < 1:
            raise OutOfRange("planning horizon must be >= 1")
        t0 = self._cursor
        rewards = self._planning_tables(t0, h)
        deltas, energies = battery_action_deltas(self.battery_cfg, self.battery, self.dt_h)
        ends_day = (t0 + h) % self.spd == 0
        end_min = self.battery_cfg.min_soc_end if (ends_day and self.eod_mode == "mask") else NEG_INF
        return PlanningModel(
            rewards=rewards,
            deltas=tuple(deltas),
            energies=tuple(energies),
            soc0=self.battery.soc,
            soc_lo=self.battery_cfg.soc_floor,
            soc_hi=self.battery_cfg.soc_max,
            end_min=end_min,
            t0=t0,
            dt_h=self.dt_h,
        )

    # Q-learning state key: hour of day, soc bucket, forecast slope sign.
    def q_state(self, soc_buckets: int) -> tuple[int, int, int]:
        minute = self.step_in_day * self.price.granularity_min
        hour = minute // 60
        soc = self.battery.soc
        hi = self.battery_cfg.soc_max
        lo = self.battery_cfg.soc_floor
        frac = 0.0 if hi == lo else (soc - lo) / (hi - lo)
        bucket = min(soc_buckets - 1, max(0, int(frac * soc_buckets)))
        return hour, bucket, self.price_slope_sign()
