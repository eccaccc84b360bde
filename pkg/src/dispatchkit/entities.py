"""Physical and market entities.

The battery model is deliberately small: three actions (idle, charge at
full rated power, discharge at full rated power), state-of-charge kept
as a fraction of current usable capacity, and a windowed linear fade
law that reprices degradation when each window closes.

Sign conventions, fixed across the package:
  * pmax_charge_kw <= 0, pmax_discharge_kw >= 0
  * grid_energy_kwh = (c*pmax_charge + d*pmax_discharge) * dt_h, so
    charging shows up negative (energy drawn) and discharging positive
  * soc rises when charging: soc' = soc - dsoc with
    dsoc = (eta_ch*c*pmax_charge + d/eta_dis*pmax_discharge) * dt_h / capacity

The exact expression shapes above are load-bearing: the compiled and
pure kernels precompute per-action constants with the same
parenthesisation so planning and execution agree to the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, time, timedelta
from enum import IntEnum

from .errors import CapacityExhausted, ConfigInvalid, InfeasibleAction
from .timeseries import (
    MINUTES_PER_DAY,
    Timestamp,
    TimeSeries,
    check_timestamp,
    format_timestamp,
)


class BatteryAction(IntEnum):
    """Discrete dispatch choice for one step (power is all-or-nothing)."""

    IDLE = 0
    CHARGE = 1
    DISCHARGE = 2

    @property
    def c(self) -> float:
        return 1.0 if self is BatteryAction.CHARGE else 0.0

    @property
    def d(self) -> float:
        return 1.0 if self is BatteryAction.DISCHARGE else 0.0


# Deterministic tie-break order used by every solver in the package.
ACTION_PREFERENCE = (BatteryAction.IDLE, BatteryAction.DISCHARGE, BatteryAction.CHARGE)


@dataclass(frozen=True)
class DegradationConfig:
    """Linear capacity fade, repriced per discharge window.

    fade_kwh_per_kwh: usable capacity lost per kWh discharged.
    window_steps: steps per repricing window; 0 means one window per day.
    """

    fade_kwh_per_kwh: float = 0.0
    replacement_cost_per_kwh: float = 0.0
    window_steps: int = 0

    def __post_init__(self):
        if self.fade_kwh_per_kwh < 0:
            raise ConfigInvalid("fade must be >= 0")
        if self.replacement_cost_per_kwh < 0:
            raise ConfigInvalid("replacement cost must be >= 0")
        if self.window_steps < 0:
            raise ConfigInvalid("window_steps must be >= 0")


@dataclass(frozen=True)
class BatteryConfig:
    name: str
    capacity_kwh: float
    pmax_charge_kw: float
    pmax_discharge_kw: float
    eta_charge: float = 1.0
    eta_discharge: float = 1.0
    dod: float = 1.0
    soc_max: float = 1.0
    soc_init: float = 0.5
    min_soc_end: float = 0.0
    degradation: DegradationConfig = field(default_factory=DegradationConfig)

    def __post_init__(self):
        if self.capacity_kwh <= 0:
            raise ConfigInvalid(f"{self.name}: capacity must be positive")
        if self.pmax_charge_kw > 0:
            raise ConfigInvalid(f"{self.name}: pmax_charge_kw is signed and must be <= 0")
        if self.pmax_discharge_kw < 0:
            raise ConfigInvalid(f"{self.name}: pmax_discharge_kw must be >= 0")
        if not 0 < self.eta_charge <= 1 or not 0 < self.eta_discharge <= 1:
            raise ConfigInvalid(f"{self.name}: efficiencies must lie in (0, 1]")
        if not 0 < self.dod <= 1:
            raise ConfigInvalid(f"{self.name}: depth of discharge must lie in (0, 1]")
        if not self.soc_floor <= self.soc_max <= 1:
            raise ConfigInvalid(
                f"{self.name}: need 1-dod <= soc_max <= 1, got soc_max={self.soc_max}"
            )
        if not self.soc_floor <= self.soc_init <= self.soc_max:
            raise ConfigInvalid(f"{self.name}: soc_init {self.soc_init} outside bounds")
        if not 0 <= self.min_soc_end <= self.soc_max:
            raise ConfigInvalid(f"{self.name}: min_soc_end {self.min_soc_end} outside [0, soc_max]")

    @property
    def soc_floor(self) -> float:
        return 1.0 - self.dod


@dataclass(frozen=True)
class BatteryState:
    """Snapshot of the battery between steps."""

    soc: float
    capacity_kwh: float
    deg_cost_per_kwh: float
    window_discharge_kwh: float = 0.0
    equivalent_cycles: float = 0.0

    @staticmethod
    def initial(cfg: BatteryConfig) -> "BatteryState":
        deg = cfg.degradation
        # Under the linear fade law each closed window reprices to
        # replacement_cost * fade, so the very first step should too.
        return BatteryState(
            soc=cfg.soc_init,
            capacity_kwh=cfg.capacity_kwh,
            deg_cost_per_kwh=deg.replacement_cost_per_kwh * deg.fade_kwh_per_kwh,
            window_discharge_kwh=0.0,
            equivalent_cycles=0.0,
        )


def battery_soc_after(cfg: BatteryConfig, state: BatteryState, action: BatteryAction, dt_h: float) -> float:
    """State of charge after one step of ``action``; no bounds check."""
    c = action.c
    d = action.d
    dsoc = (
        (cfg.eta_charge * c * cfg.pmax_charge_kw + d / cfg.eta_discharge * cfg.pmax_discharge_kw)
        * dt_h
        / state.capacity_kwh
    )
    return state.soc - dsoc


def battery_action_deltas(cfg: BatteryConfig, state: BatteryState, dt_h: float):
    """Per-action (dsoc, grid_energy_kwh) pairs, index = BatteryAction value.

    Uses the same expression shape as battery_soc_after so solvers that
    plan on these constants land on bit-identical trajectories.
    """
    deltas = []
    energies = []
    for action in (BatteryAction.IDLE, BatteryAction.CHARGE, BatteryAction.DISCHARGE):
        c = action.c
        d = action.d
        dsoc = (
            (cfg.eta_charge * c * cfg.pmax_charge_kw + d / cfg.eta_discharge * cfg.pmax_discharge_kw)
            * dt_h
            / state.capacity_kwh
        )
        deltas.append(dsoc)
        energies.append((c * cfg.pmax_charge_kw + d * cfg.pmax_discharge_kw) * dt_h)
    return deltas, energies


def battery_feasible_actions(
    cfg: BatteryConfig, state: BatteryState, dt_h: float, min_soc: float | None = None
) -> tuple[BatteryAction, ...]:
    """Actions whose next state of charge stays inside the operating band.

    min_soc optionally tightens the lower bound (end-of-day floors).
    Ordered by the package tie-break preference.
    """
    lo = cfg.soc_floor if min_soc is None else max(cfg.soc_floor, min_soc)
    out = []
    for action in ACTION_PREFERENCE:
        soc = battery_soc_after(cfg, state, action, dt_h)
        if lo <= soc <= cfg.soc_max:
            out.append(action)
    return tuple(out)


def battery_apply_action(
    cfg: BatteryConfig, state: BatteryState, action: BatteryAction, dt_h: float
) -> tuple[BatteryState, float]:
    """Advance one step; returns (new state, signed grid energy in kWh).

    Raises InfeasibleAction if the move leaves the operating band.
    Degradation windows are closed separately by
    battery_close_degradation_window.
    """
    if state.capacity_kwh <= 0:
        raise CapacityExhausted(f"{cfg.name}: no usable capacity left")
    soc = battery_soc_after(cfg, state, action, dt_h)
    if not cfg.soc_floor <= soc <= cfg.soc_max:
        raise InfeasibleAction(
            f"{cfg.name}: {action.name} moves soc to {soc:.6f}, outside "
            f"[{cfg.soc_floor:.6f}, {cfg.soc_max:.6f}]"
        )
    c = action.c
    d = action.d
    grid_energy_kwh = (c * cfg.pmax_charge_kw + d * cfg.pmax_discharge_kw) * dt_h
    discharged = d * cfg.pmax_discharge_kw * dt_h
    new_state = replace(
        state,
        soc=soc,
        window_discharge_kwh=state.window_discharge_kwh + discharged,
    )
    return new_state, grid_energy_kwh


_ALPHA_EPS = 1e-12


def battery_close_degradation_window(cfg: BatteryConfig, state: BatteryState) -> BatteryState:
    """Close one fade window: shrink capacity, reprice the kWh cost.

    With zero discharge in the window nothing changes.  Capacity hitting
    zero raises CapacityExhausted (the battery is spent).
    """
    w = state.window_discharge_kwh
    if w <= 0.0:
        return replace(state, window_discharge_kwh=0.0)
    deg = cfg.degradation
    new_capacity = state.capacity_kwh - deg.fade_kwh_per_kwh * w
    if new_capacity <= 0:
        raise CapacityExhausted(
            f"{cfg.name}: capacity fell to {new_capacity:.6f} kWh after a {w:.3f} kWh window"
        )
    alpha = deg.replacement_cost_per_kwh * (state.capacity_kwh - new_capacity) / max(w, _ALPHA_EPS)
    cycles = state.equivalent_cycles + w / (cfg.capacity_kwh * cfg.dod)
    return BatteryState(
        soc=state.soc,
        capacity_kwh=new_capacity,
        deg_cost_per_kwh=alpha,
        window_discharge_kwh=0.0,
        equivalent_cycles=cycles,
    )


# -- generation and load ------------------------------------------------


@dataclass(frozen=True)
class SourceEntity:
    """Non-dispatchable generator (solar, wind) with actuals and an
    optional externally supplied forecast series."""

    name: str
    max_capacity_kw: float
    generation: TimeSeries
    forecast: TimeSeries | None = None

    def __post_init__(self):
        if self.max_capacity_kw <= 0:
            raise ConfigInvalid(f"{self.name}: max_capacity_kw must be positive")
        if float(self.generation.values.min()) < 0:
            raise ConfigInvalid(f"{self.name}: generation must be >= 0")
        if float(self.generation.values.max()) > self.max_capacity_kw * (1 + 1e-9):
            raise ConfigInvalid(f"{self.name}: generation exceeds max capacity")


@dataclass(frozen=True)
class ConsumerEntity:
    name: str
    demand: TimeSeries

    def __post_init__(self):
        if float(self.demand.values.min()) < 0:
            raise ConfigInvalid(f"{self.name}: demand must be >= 0")


# -- markets -------------------------------------------------------------

RECURRENCE_DAILY = "daily"
RECURRENCE_EVERY_N_MIN = "every_n_min"


@dataclass(frozen=True)
class MarketSchedule:
    """When a market accepts bids and which slots each bid covers.

    daily:        one deadline per day at window_end (HH:MM clock time).
    every_n_min:  deadlines anchored at midnight every n minutes.
    Delivery for a deadline D covers n_slots slots of slot_duration_min
    starting at D + delivery_offset_min.
    """

    recurrence: str
    window_duration_min: int
    n_slots: int
    slot_duration_min: int
    delivery_offset_min: int
    window_end: str | None = None
    every_n_min: int | None = None

    def __post_init__(self):
        if self.recurrence not in (RECURRENCE_DAILY, RECURRENCE_EVERY_N_MIN):
            raise ConfigInvalid(f"unknown recurrence {self.recurrence!r}")
        if self.window_duration_min <= 0:
            raise ConfigInvalid("window_duration_min must be positive")
        if self.n_slots <= 0 or self.slot_duration_min <= 0:
            raise ConfigInvalid("n_slots and slot_duration_min must be positive")
        if self.delivery_offset_min < 0:
            raise ConfigInvalid("delivery_offset_min must be >= 0")
        if self.recurrence == RECURRENCE_DAILY:
            if self.window_end is None:
                raise ConfigInvalid("daily recurrence needs window_end (HH:MM)")
            self._parse_window_end()
        else:
            n = self.every_n_min
            if n is None or n <= 0 or MINUTES_PER_DAY % n != 0:
                raise ConfigInvalid("every_n_min must be a positive divisor of 1440")

    def _parse_window_end(self) -> time:
        try:
            hh, mm = self.window_end.split(":")
            return time(int(hh), int(mm))
        except (ValueError, AttributeError):
            raise ConfigInvalid(f"bad window_end {self.window_end!r}, expected HH:MM") from None


@dataclass(frozen=True)
class DeadlineInfo:
    deadline: Timestamp
    window_open: Timestamp
    slots: tuple[Timestamp, ...]

    def window_contains(self, now: Timestamp) -> bool:
        return self.window_open <= now <= self.deadline


def market_next_deadline(schedule: MarketSchedule, now: Timestamp) -> DeadlineInfo:
    """Earliest deadline at or after ``now`` plus its delivery slots."""
    check_timestamp(now)
    if schedule.recurrence == RECURRENCE_DAILY:
        end = schedule._parse_window_end()
        deadline = now.replace(hour=end.hour, minute=end.minute)
        if deadline < now:
            deadline += timedelta(days=1)
    else:
        n = schedule.every_n_min
        midnight = now.replace(hour=0, minute=0)
        minutes = (now - midnight) // timedelta(minutes=1)
        k = -(-minutes // n)  # ceil
        deadline = midnight + timedelta(minutes=k * n)
    first = deadline + timedelta(minutes=schedule.delivery_offset_min)
    slots = tuple(
        first + timedelta(minutes=i * schedule.slot_duration_min) for i in range(schedule.n_slots)
    )
    return DeadlineInfo(
        deadline=deadline,
        window_open=deadline - timedelta(minutes=schedule.window_duration_min),
        slots=slots,
    )


@dataclass(frozen=True)
class MarketEntity:
    """Tradable market with a clearing-price series.

    dsm_rate_per_kwh prices deviation between scheduled and delivered
    energy at settlement.
    """

    name: str
    schedule: MarketSchedule
    price: TimeSeries
    carbon: TimeSeries | None = None
    dsm_rate_per_kwh: float = 0.0

    def __post_init__(self):
        if self.dsm_rate_per_kwh < 0:
            raise ConfigInvalid(f"{self.name}: dsm_rate_per_kwh must be >= 0")


# -- commitments ----------------------------------------------------------

COMMITTED = "COMMITTED"
SCHEDULED = "SCHEDULED"
DELIVERED = "DELIVERED"

_STATUS_ORDER = (COMMITTED, SCHEDULED, DELIVERED)


@dataclass
class Commitment:
    """A cleared bid: promised delivery of volume_kwh over one slot."""

    market: str
    slot_start: Timestamp
    slot_minutes: int
    volume_kwh: float
    price: float
    deadline: Timestamp
    status: str = COMMITTED
    delivered_kwh: float | None = None

    def __post_init__(self):
        if self.volume_kwh < 0:
            raise ConfigInvalid("commitment volume must be >= 0")
        if self.status not in _STATUS_ORDER:
            raise ConfigInvalid(f"unknown commitment status {self.status!r}")

    @property
    def slot_end(self) -> Timestamp:
        return self.slot_start + timedelta(minutes=self.slot_minutes)

    def advance(self, status: str, delivered_kwh: float | None = None) -> None:
        """Move forward through COMMITTED -> SCHEDULED -> DELIVERED."""
        if _STATUS_ORDER.index(status) != _STATUS_ORDER.index(self.status) + 1:
            raise ConfigInvalid(f"bad status transition {self.status} -> {status}")
        self.status = status
        if status == DELIVERED:
            if delivered_kwh is None or delivered_kwh < 0:
                raise ConfigInvalid("DELIVERED needs delivered_kwh >= 0")
            self.delivered_kwh = delivered_kwh

    def describe(self) -> str:
        return (
            f"{self.market} {format_timestamp(self.slot_start)} "
            f"{self.volume_kwh:.3f} kWh @ {self.price:.4f} [{self.status}]"
        )
