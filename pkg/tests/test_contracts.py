import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispatchkit import build_decision_units, decision_slots
from dispatchkit.contracts import Contract, PenaltyFn, penalty_value
from dispatchkit.entities import (
    ConsumerEntity,
    MarketEntity,
    MarketSchedule,
    SourceEntity,
)
from dispatchkit.errors import (
    ConfigInvalid,
    GranularityMismatch,
    LengthMismatch,
    UnknownEntity,
)
from dispatchkit.timeseries import parse_timestamp

from conftest import battery, series


def market(name="dam", gran=15, **sched_kw):
    base = dict(
        recurrence="daily",
        window_duration_min=120,
        n_slots=96,
        slot_duration_min=15,
        delivery_offset_min=600,
        window_end="14:00",
    )
    base.update(sched_kw)
    n = (1440 // gran) * 2
    return MarketEntity(
        name=name,
        schedule=MarketSchedule(**base),
        price=series(np.full(n, 10.0), gran=gran),
    )


def source(name="pv", gran=15):
    n = (1440 // gran) * 2
    return SourceEntity(name=name, max_capacity_kw=5.0,
                        generation=series(np.full(n, 2.0), gran=gran))


def consumer(name="load", gran=15):
    n = (1440 // gran) * 2
    return ConsumerEntity(name=name, demand=series(np.full(n, 1.0), gran=gran))


# -- penalties ----------------------------------------------------------


def test_penalty_none_is_free():
    assert penalty_value(PenaltyFn(), [0.0, 0.0], [5.0, 5.0]) == 0.0


def test_penalty_per_step():
    fn = PenaltyFn(kind="linear_per_step", rate=2.0)
    # shortfalls 1 and 3; oversupply never credits
    assert penalty_value(fn, [1.0, 2.0, 9.0], [2.0, 5.0, 1.0]) == pytest.approx(8.0)


def test_penalty_daily_nets_within_day():
    fn = PenaltyFn(kind="linear_daily", rate=2.0)
    sup = [1.0, 9.0]
    com = [5.0, 1.0]
    # per-step view owes 4; daily netting owes nothing
    assert penalty_value(fn, sup, com, steps_per_day=2) == 0.0
    per_step = PenaltyFn(kind="linear_per_step", rate=2.0)
    assert penalty_value(per_step, sup, com) == pytest.approx(8.0)


def test_penalty_hour_subset():
    fn = PenaltyFn(kind="linear_per_step", rate=1.0, hours=(0,))
    sup = [0.0] * 48
    com = [1.0] * 48
    # 24 hourly steps/day over 2 days; only hour 0 accrues
    assert penalty_value(fn, sup, com, steps_per_day=24) == pytest.approx(2.0)


def test_penalty_validation():
    with pytest.raises(ConfigInvalid):
        PenaltyFn(kind="quadratic")
    with pytest.raises(ConfigInvalid):
        PenaltyFn(kind="linear_per_step", rate=-1.0)
    with pytest.raises(ConfigInvalid):
        PenaltyFn(kind="linear_per_step", hours=(25,))
    with pytest.raises(ConfigInvalid):
        PenaltyFn(kind="linear_daily", hours=(1,))
    with pytest.raises(LengthMismatch):
        penalty_value(PenaltyFn(kind="linear_per_step", rate=1.0), [1.0], [1.0, 2.0])
    with pytest.raises(ConfigInvalid):
        penalty_value(PenaltyFn(kind="linear_daily", rate=1.0), [1.0], [1.0])
    with pytest.raises(LengthMismatch):
        penalty_value(PenaltyFn(kind="linear_daily", rate=1.0), [1.0] * 3, [1.0] * 3,
                      steps_per_day=2)


def test_contract_with_itself_rejected():
    with pytest.raises(ConfigInvalid):
        Contract(contractor="a", contractee="a")


# -- decision units -------------------------------------------------------


def test_connected_components():
    ents = [source("pv"), source("wind"), consumer("load"), market("dam"), battery()]
    contracts = [
        Contract("pv", "dam"),
        Contract("wind", "dam"),
        Contract("bat", "dam"),
    ]
    units = build_decision_units(ents, contracts)
    # pv+wind+bat+dam join up; load stays alone
    assert [u.name for u in units] == ["bat", "load"]
    assert units[0].entity_names == ("bat", "dam", "pv", "wind")
    assert len(units[0].contracts) == 3
    assert units[1].entity_names == ("load",)


def test_unit_lookup_and_kind_filters():
    ents = [source("pv"), market("dam"), battery()]
    units = build_decision_units(ents, [Contract("pv", "dam"), Contract("bat", "dam")])
    unit = units[0]
    assert unit.entity("pv").name == "pv"
    with pytest.raises(UnknownEntity):
        unit.entity("nope")
    assert [m.name for m in unit.markets] == ["dam"]
    assert [s.name for s in unit.sources] == ["pv"]
    assert [b.name for b in unit.batteries] == ["bat"]
    assert unit.consumers == ()


def test_duplicate_names_rejected():
    with pytest.raises(ConfigInvalid):
        build_decision_units([source("x"), consumer("x")], [])


def test_contract_to_unknown_entity():
    with pytest.raises(UnknownEntity):
        build_decision_units([source("pv")], [Contract("pv", "ghost")])


def test_mixed_granularity_unit_rejected():
    ents = [source("pv", gran=15), market("dam", gran=60)]
    with pytest.raises(GranularityMismatch):
        build_decision_units(ents, [Contract("pv", "dam")])
    # fine while they stay in separate units
    units = build_decision_units(ents, [])
    assert len(units) == 2


@given(
    n=st.integers(min_value=1, max_value=8),
    edges=st.lists(
        st.tuples(st.integers(min_value=0, max_value=7), st.integers(min_value=0, max_value=7)),
        max_size=12,
    ),
)
@settings(max_examples=60, deadline=None)
def test_units_partition_entities(n, edges):
    ents = [source(f"s{i}") for i in range(n)]
    contracts = [
        Contract(f"s{a}", f"s{b}") for a, b in edges if a != b and a < n and b < n
    ]
    units = build_decision_units(ents, contracts)
    seen = [name for u in units for name in u.entity_names]
    assert sorted(seen) == sorted(e.name for e in ents)  # exactly once each
    assert [u.name for u in units] == sorted(u.name for u in units)


# -- decision slots --------------------------------------------------------


def overlapping_pair():
    """Two markets whose next delivery windows collide."""
    dam = market("dam", window_end="14:00", delivery_offset_min=60,
                 n_slots=8, window_duration_min=120)
    rtm = MarketEntity(
        name="rtm",
        schedule=MarketSchedule(
            recurrence="every_n_min",
            window_duration_min=30,
            n_slots=4,
            slot_duration_min=15,
            delivery_offset_min=60,
            every_n_min=30,
        ),
        price=series(np.full(192, 10.0), gran=15),
    )
    units = build_decision_units(
        [dam, rtm, source("pv")],
        [Contract("pv", "dam"), Contract("pv", "rtm")],
    )
    return units[0]


def test_overlapping_slots_go_to_earlier_deadline():
    unit = overlapping_pair()
    now = parse_timestamp("2024-01-01T14:00")
    # dam deadline 14:00 delivers 15:00..16:45; rtm deadline 14:00
    # delivers 15:00, 15:15, 15:30, 15:45 -> all claimed by dam (name tie)
    decisions = decision_slots(unit, now)
    assert [d.market.name for d in decisions] == ["dam"]
    claimed = [s for d in decisions for s in d.slots]
    assert len(claimed) == len(set(claimed))


def test_disjoint_slots_both_fire():
    unit = overlapping_pair()
    now = parse_timestamp("2024-01-01T13:30")
    # dam window contains 13:30 (deadline 14:00); rtm deadline 13:30
    decisions = decision_slots(unit, now)
    names = [d.market.name for d in decisions]
    assert names == ["rtm", "dam"]  # rtm deadline is earlier
    slot_sets = [set(d.slots) for d in decisions]
    assert slot_sets[0].isdisjoint(slot_sets[1])


def test_outside_all_windows_no_decisions():
    unit = overlapping_pair()
    # rtm windows cover every instant, so drop rtm to see silence
    dam_only = build_decision_units(
        [market("dam", window_duration_min=30), source("pv")],
        [Contract("pv", "dam")],
    )[0]
    assert decision_slots(dam_only, parse_timestamp("2024-01-01T10:00")) == []
