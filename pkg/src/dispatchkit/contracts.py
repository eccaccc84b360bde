"""Contracts wire entities into decision units.

A contract is a directed supply promise contractor -> contractee with a
penalty law for shortfall.  Decision units are the connected components
of the undirected contract graph: everything that must be decided
jointly.  Isolated entities form singleton units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .entities import (
    BatteryConfig,
    ConsumerEntity,
    DeadlineInfo,
    MarketEntity,
    SourceEntity,
    market_next_deadline,
)
from .errors import (
    ConfigInvalid,
    GranularityMismatch,
    LengthMismatch,
    UnknownEntity,
)
from .timeseries import Timestamp

Entity = Union[BatteryConfig, ConsumerEntity, MarketEntity, SourceEntity]

PENALTY_NONE = "none"
PENALTY_LINEAR_PER_STEP = "linear_per_step"
PENALTY_LINEAR_DAILY = "linear_daily"

_PENALTY_KINDS = (PENALTY_NONE, PENALTY_LINEAR_PER_STEP, PENALTY_LINEAR_DAILY)


@dataclass(frozen=True)
class PenaltyFn:
    """Shortfall pricing for a contract.

    linear_per_step: rate * sum_t max(0, committed_t - supplied_t)
    linear_daily:    rate * sum_days max(0, committed_day - supplied_day)
    hours, when given, restricts which hours of day accrue (per-step
    kinds only).
    """

    kind: str = PENALTY_NONE
    rate: float = 0.0
    hours: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in _PENALTY_KINDS:
            raise ConfigInvalid(f"unknown penalty kind {self.kind!r}")
        if self.rate < 0:
            raise ConfigInvalid("penalty rate must be >= 0")
        if self.hours is not None:
            object.__setattr__(self, "hours", tuple(sorted(set(self.hours))))
            if self.hours and not all(0 <= h < 24 for h in self.hours):
                raise ConfigInvalid("penalty hours must lie in [0, 24)")
            if self.kind == PENALTY_LINEAR_DAILY:
                raise ConfigInvalid("hour subsets apply to per-step penalties only")


def penalty_value(
    fn: PenaltyFn,
    supplied,
    committed,
    steps_per_day: int | None = None,
) -> float:
    """Penalty owed for a supplied-vs-committed pair of equal-length lists.

    steps_per_day is required for daily accrual and for hour subsets; in
    both cases it must divide the list length exactly.
    """
    supplied = np.asarray(supplied, dtype=np.float64)
    committed = np.asarray(committed, dtype=np.float64)
    if supplied.shape != committed.shape or supplied.ndim != 1:
        raise LengthMismatch(
            f"supplied ({supplied.shape}) and committed ({committed.shape}) differ"
        )
    if fn.kind == PENALTY_NONE:
        return 0.0
    n = len(supplied)
    shortfall = np.maximum(0.0, committed - supplied)
    if fn.kind == PENALTY_LINEAR_PER_STEP:
        if fn.hours is not None:
            if steps_per_day is None or steps_per_day <= 0:
                raise ConfigInvalid("hour-restricted penalty needs steps_per_day")
            if n % steps_per_day != 0:
                raise LengthMismatch(f"{n} steps do not tile days of {steps_per_day}")
            gran = 1440 // steps_per_day
            hours = np.array(
                [((i % steps_per_day) * gran) // 60 for i in range(n)], dtype=np.int64
            )
            shortfall = np.where(np.isin(hours, fn.hours), shortfall, 0.0)
        return float(fn.rate * shortfall.sum())
    # daily accrual: net the whole day before pricing the shortfall
    if steps_per_day is None or steps_per_day <= 0:
        raise ConfigInvalid("daily penalty needs steps_per_day")
    if n % steps_per_day != 0:
        raise LengthMismatch(f"{n} steps do not tile days of {steps_per_day}")
    days = n // steps_per_day
    sup_daily = supplied.reshape(days, steps_per_day).sum(axis=1)
    com_daily = committed.reshape(days, steps_per_day).sum(axis=1)
    return float(fn.rate * np.maximum(0.0, com_daily - sup_daily).sum())


@dataclass(frozen=True)
class Contract:
    contractor: str
    contractee: str
    penalty: PenaltyFn = PenaltyFn()

    def __post_init__(self):
        if self.contractor == self.contractee:
            raise ConfigInvalid(f"contract {self.contractor!r} with itself")

    @property
    def key(self) -> str:
        return f"{self.contractor}->{self.contractee}"


def _entity_granularity(entity: Entity) -> int | None:
    if isinstance(entity, SourceEntity):
        return entity.generation.granularity_min
    if isinstance(entity, ConsumerEntity):
        return entity.demand.granularity_min
    if isinstance(entity, MarketEntity):
        return entity.price.granularity_min
    return None  # batteries carry no series


@dataclass(frozen=True)
class DecisionUnit:
    """One connected component of the contract graph."""

    name: str
    entities: tuple[Entity, ...]
    contracts: tuple[Contract, ...]

    def entity(self, name: str) -> Entity:
        for e in self.entities:
            if e.name == name:
                return e
        raise UnknownEntity(f"unit {self.name!r} has no entity {name!r}")

    @property
    def entity_names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entities)

    @property
    def markets(self) -> tuple[MarketEntity, ...]:
        return tuple(e for e in self.entities if isinstance(e, MarketEntity))

    @property
    def sources(self) -> tuple[SourceEntity, ...]:
        return tuple(e for e in self.entities if isinstance(e, SourceEntity))

    @property
    def consumers(self) -> tuple[ConsumerEntity, ...]:
        return tuple(e for e in self.entities if isinstance(e, ConsumerEntity))

    @property
    def batteries(self) -> tuple[BatteryConfig, ...]:
        return tuple(e for e in self.entities if isinstance(e, BatteryConfig))


def build_decision_units(entities: list[Entity], contracts: list[Contract]) -> list[DecisionUnit]:
    """Partition entities into decision units.

    Deterministic: entities inside a unit sort by name, units sort by
    their smallest entity name.  Every entity lands in exactly one unit.
    """
    by_name: dict[str, Entity] = {}
    for e in entities:
        if e.name in by_name:
            raise ConfigInvalid(f"duplicate entity name {e.name!r}")
        by_name[e.name] = e

    parent: dict[str, str] = {name: name for name in by_name}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in contracts:
        for side in (c.contractor, c.contractee):
            if side not in by_name:
                raise UnknownEntity(f"contract {c.key} references unknown entity {side!r}")
        ra, rb = find(c.contractor), find(c.contractee)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: dict[str, list[str]] = {}
    for name in by_name:
        groups.setdefault(find(name), []).append(name)

    units = []
    for root in sorted(groups):
        members = sorted(groups[root])
        grans = {
            g for g in (_entity_granularity(by_name[m]) for m in members) if g is not None
        }
        if len(grans) > 1:
            raise GranularityMismatch(
                f"unit {min(members)!r} mixes granularities {sorted(grans)}"
            )
        unit_contracts = tuple(
            sorted(
                (c for c in contracts if find(c.contractor) == root),
                key=lambda c: (c.contractor, c.contractee),
            )
        )
        units.append(
            DecisionUnit(
                name=min(members),
                entities=tuple(by_name[m] for m in members),
                contracts=unit_contracts,
            )
        )
    return units


@dataclass(frozen=True)
class MarketDecision:
    """A bid decision due now: the market, its deadline info, and the
    delivery slots this decision may still claim."""

    market: MarketEntity
    info: DeadlineInfo
    slots: tuple[Timestamp, ...]


def decision_slots(unit: DecisionUnit, now: Timestamp) -> list[MarketDecision]:
    """Markets of the unit whose bid window contains ``now``.

    Overlapping delivery slots go to the earlier deadline (name breaks
    ties), so the returned slot lists are mutually disjoint.  Markets
    left with no slots are dropped.
    """
    due: list[tuple[MarketEntity, DeadlineInfo]] = []
    for market in sorted(unit.markets, key=lambda m: m.name):
        info = market_next_deadline(market.schedule, now)
        if info.window_contains(now):
            due.append((market, info))
    due.sort(key=lambda pair: (pair[1].deadline, pair[0].name))
    claimed: set[Timestamp] = set()
    out = []
    for market, info in due:
        slots = tuple(s for s in info.slots if s not in claimed)
        claimed.update(slots)
        if slots:
            out.append(MarketDecision(market=market, info=info, slots=slots))
    return out
