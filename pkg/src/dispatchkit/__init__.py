"""dispatchkit: battery dispatch planning over priced time series.

Three scenario families share one planning core: grid arbitrage against
price/carbon signals, a microgrid meter with local solar and demand,
and portfolio bidding into slot markets.  Plans come from an exact
lattice solver, simulated annealing, receding-horizon replanning, or a
tabular value learner; batch, scheduled and event-driven execution all
replay the same decide/step loop.
"""

from ._kernels import BACKEND
from .entities import (
    ACTION_PREFERENCE,
    BatteryAction,
    BatteryConfig,
    BatteryState,
    Commitment,
    ConsumerEntity,
    DegradationConfig,
    MarketEntity,
    MarketSchedule,
    SourceEntity,
    battery_action_deltas,
    battery_apply_action,
    battery_close_degradation_window,
    battery_feasible_actions,
    battery_soc_after,
)
from .contracts import Contract, DecisionUnit, PenaltyFn, build_decision_units, decision_slots
from .environment import Environment, ObjectiveWeights, PlanningModel, RewardComponents
from .errors import ConfigError, DataError, DispatchError, RuntimeFailure
from .forecasting import ForecasterSpec, forecast, mae
from .optimizers import (
    ActionPlan,
    QParams,
    SAParams,
    act,
    solve_exact,
    solve_mpc,
    solve_sa,
    train_q,
)
from .reporting import RunReport, TraceRow, compute_totals
from .runners import benchmark, event_runner, run, scheduled_runner
from .scenarios import (
    Bid,
    BiddingEnvironment,
    DispatchResult,
    MicrogridEnvironment,
    Scenario,
    ScenarioConfig,
    Settlement,
    bo_settle,
    build_scenario,
    mg_dispatch,
    mg_reward,
)
from .sweeps import SweepSpec, sweep
from .timeseries import (
    ScaleParams,
    Table,
    TimeSeries,
    format_timestamp,
    load_table,
    parse_timestamp,
    scale_minmax,
    slice_series,
)

__version__ = "0.1.0"

__all__ = [
    "ACTION_PREFERENCE",
    "ActionPlan",
    "BACKEND",
    "BatteryAction",
    "BatteryConfig",
    "BatteryState",
    "Bid",
    "BiddingEnvironment",
    "Commitment",
    "ConfigError",
    "ConsumerEntity",
    "Contract",
    "DataError",
    "DecisionUnit",
    "DegradationConfig",
    "DispatchError",
    "DispatchResult",
    "Environment",
    "ForecasterSpec",
    "MarketEntity",
    "MarketSchedule",
    "MicrogridEnvironment",
    "ObjectiveWeights",
    "PenaltyFn",
    "PlanningModel",
    "QParams",
    "RewardComponents",
    "RunReport",
    "RuntimeFailure",
    "SAParams",
    "ScaleParams",
    "Scenario",
    "ScenarioConfig",
    "Settlement",
    "SourceEntity",
    "SweepSpec",
    "Table",
    "TimeSeries",
    "TraceRow",
    "act",
    "battery_action_deltas",
    "battery_apply_action",
    "battery_close_degradation_window",
    "battery_feasible_actions",
    "battery_soc_after",
    "benchmark",
    "bo_settle",
    "build_decision_units",
    "build_scenario",
    "compute_totals",
    "decision_slots",
    "event_runner",
    "forecast",
    "format_timestamp",
    "load_table",
    "mae",
    "mg_dispatch",
    "mg_reward",
    "parse_timestamp",
    "run",
    "scale_minmax",
    "scheduled_runner",
    "slice_series",
    "solve_exact",
    "solve_mpc",
    "solve_sa",
    "sweep",
    "train_q",
    "__version__",
]
