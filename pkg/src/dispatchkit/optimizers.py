"""Solvers: exact lattice DP, simulated annealing, receding-horizon MPC
and tabular Q-learning.

All planners speak PlanningModel (forecast reward table + battery
kinematics) and return an ActionPlan whose objective is the plan's
value under that model; realized value on actuals is the environment's
business.  Every solver is deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as kernels
from .entities import ACTION_PREFERENCE, BatteryAction
from .environment import Environment, EnvState, PlanningModel, RewardComponents
from .errors import ConfigInvalid, Infeasible, NoFeasibleFound

_N_ACTIONS = 3


@dataclass(frozen=True)
class ActionPlan:
    actions: tuple[BatteryAction, ...]
    objective: float
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.actions)


def solve_exact(model: PlanningModel, merge_eps: float = 1e-9) -> ActionPlan:
    """Optimal plan by dynamic programming over reachable soc states.

    The three-action structure makes the reachable lattice small, so
    the binary program is solved exactly; states closer than merge_eps
    collapse.  Raises Infeasible when the terminal floor is unreachable.
    """
    actions, objective = kernels.solve_lattice(
        model.rewards,
        np.asarray(model.deltas, dtype=np.float64),
        model.soc0,
        model.soc_lo,
        model.soc_hi,
        model.end_min,
        merge_eps,
    )
    if actions is None:
        raise Infeasible(
            f"no action sequence from soc {model.soc0:.4f} reaches the terminal floor"
        )
    return ActionPlan(
        actions=tuple(BatteryAction(int(a)) for a in actions),
        objective=float(objective),
        meta={"solver": "exact", "backend": kernels.BACKEND},
    )


@dataclass(frozen=True)
class SAParams:
    iters: int = 20000
    t_initial: float = 0.8
    cooling: float = 0.9965
    seed: int = 0

    def __post_init__(self):
        if self.iters < 0:
            raise ConfigInvalid("iters must be >= 0")
        if self.t_initial <= 0:
            raise ConfigInvalid("t_initial must be positive")
        if not 0 < self.cooling <= 1:
            raise ConfigInvalid("cooling must lie in (0, 1]")


def solve_sa(model: PlanningModel, params: SAParams | None = None) -> ActionPlan:
    """Simulated annealing from the all-idle plan.

    Neighbor move: resample one uniformly chosen step to a uniform
    action.  Infeasible candidates are graded by objective minus a
    per-violation penalty, sized so the chain can still cross short
    infeasible ridges (a single flip mid-plan shifts the whole state
    suffix, so ridge widths grow with the horizon); the returned plan
    comes from a best-seen-feasible ratchet, never from the chain
    position, so the penalty only shapes the search.

    t_initial is relative: the working temperature is t_initial times
    the mean per-step reward spread, so the same schedule behaves the
    same whether prices are quoted in cents or in hundreds.  Cooling is
    geometric; when no new best has been found for a while the chain
    reheats to t_initial and restarts from the incumbent best, which in
    practice recovers runs that froze in a local basin.

    Returns the best feasible plan seen; raises NoFeasibleFound if
    there was none.
    """
    params = params or SAParams()
    rewards = np.ascontiguousarray(model.rewards, dtype=np.float64)
    deltas = np.asarray(model.deltas, dtype=np.float64)
    horizon = model.horizon
    rng = np.random.default_rng(params.seed)

    reward_scale = float((rewards.max(axis=1) - rewards.min(axis=1)).mean())
    if reward_scale <= 0.0:
        reward_scale = 1.0
    # about a third of a typical step swing per violation: enough to
    # prefer feasible plans, small enough that multi-flip repairs of a
    # shifted soc suffix stay reachable
    violation_cost = 0.35 * reward_scale + 1.0
    stall_limit = max(100, params.iters // 40)

    def score(plan: np.ndarray) -> tuple[float, int]:
        obj, violations, _ = kernels.evaluate_plan(
            plan, rewards, deltas, model.soc0, model.soc_lo, model.soc_hi, model.end_min
        )
        return float(obj), int(violations)

    plan = np.zeros(horizon, dtype=np.int64)  # all idle
    obj, violations = score(plan)
    current = obj - violation_cost * violations
    best_obj = obj if violations == 0 else None
    best_plan = plan.copy() if violations == 0 else None

    t0 = params.t_initial * reward_scale
    temp = t0
    accepted = 0
    restarts = 0
    last_improve = 0
    for it in range(params.iters):
        if it - last_improve >= stall_limit and best_plan is not None:
            temp = t0
            plan = best_plan.copy()
            current = best_obj
            restarts += 1
            last_improve = it
        j = int(rng.integers(horizon))
        a = int(rng.integers(_N_ACTIONS))
        candidate = plan.copy()
        candidate[j] = a
        c_obj, c_viol = score(candidate)
        c_score = c_obj - violation_cost * c_viol
        delta = c_score - current
        if delta >= 0 or rng.random() < math.exp(delta / temp):
            plan = candidate
            current = c_score
            accepted += 1
            if c_viol == 0 and (best_obj is None or c_obj > best_obj):
                best_obj = c_obj
                best_plan = candidate.copy()
                last_improve = it
        temp *= params.cooling

    if best_plan is None:
        raise NoFeasibleFound(f"annealing saw no feasible plan in {params.iters} iterations")
    return ActionPlan(
        actions=tuple(BatteryAction(int(a)) for a in best_plan),
        objective=float(best_obj),
        meta={
            "solver": "sa",
            "iters": params.iters,
            "accepted": accepted,
            "restarts": restarts,
            "seed": params.seed,
        },
    )


def solve_mpc(
    env: Environment,
    horizon: int | None = None,
    inner: str = "exact",
    sa_params: SAParams | None = None,
    max_steps: int | None = None,
) -> tuple[ActionPlan, list[RewardComponents]]:
    """Receding horizon: plan on forecasts, execute the first action on
    actuals, repeat.  Runs the environment to its end (or max_steps).

    Returns the executed actions as an ActionPlan whose objective is
    the realized total net reward, plus the per-step components.
    """
    if inner not in ("exact", "sa"):
        raise ConfigInvalid(f"unknown inner solver {inner!r}")
    executed: list[BatteryAction] = []
    realized: list[RewardComponents] = []
    total = 0.0
    steps = 0
    while not env.done and (max_steps is None or steps < max_steps):
        model = env.planning_model(horizon)
        if inner == "exact":
            plan = solve_exact(model)
        else:
            plan = solve_sa(model, sa_params)
        action = plan.actions[0]
        _, rc, _, _ = env.step(action)
        executed.append(action)
        realized.append(rc)
        total += rc.r_net
        steps += 1
    return (
        ActionPlan(
            actions=tuple(executed),
            objective=total,
            meta={"solver": "mpc", "inner": inner, "realized": True},
        ),
        realized,
    )


# -- tabular Q-learning ------------------------------------------------------


@dataclass(frozen=True)
class QParams:
    episodes: int = 500
    gamma: float = 0.99
    lr: float = 0.3
    eps_start: float = 1.0
    eps_end: float = 0.05
    soc_buckets: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigInvalid("episodes must be >= 1")
        if not 0 <= self.gamma <= 1:
            raise ConfigInvalid("gamma must lie in [0, 1]")
        if not 0 < self.lr <= 1:
            raise ConfigInvalid("lr must lie in (0, 1]")
        if not 0 <= self.eps_end <= self.eps_start <= 1:
            raise ConfigInvalid("need 0 <= eps_end <= eps_start <= 1")
        if self.soc_buckets < 2:
            raise ConfigInvalid("soc_buckets must be >= 2")


@dataclass
class QPolicy:
    """Greedy lookup policy over (hour, soc bucket, price slope sign)."""

    table: dict
    soc_buckets: int
    soc_lo: float
    soc_hi: float
    granularity_min: int
    meta: dict = field(default_factory=dict)

    def state_key(self, state: EnvState) -> tuple[int, int, int]:
        minute = state.step_in_day * self.granularity_min
        soc = state.battery.soc
        span = self.soc_hi - self.soc_lo
        frac = 0.0 if span == 0 else (soc - self.soc_lo) / span
        bucket = min(self.soc_buckets - 1, max(0, int(frac * self.soc_buckets)))
        return minute // 60, bucket, state.price_slope_sign

    def q_values(self, key) -> np.ndarray:
        row = self.table.get(key)
        if row is None:
            row = np.zeros(_N_ACTIONS)
            self.table[key] = row
        return row


def act(policy: QPolicy, state: EnvState) -> BatteryAction:
    """Greedy feasible action; ties break idle > discharge > charge."""
    feasible = state.feasible
    if not feasible:
        raise Infeasible("state offers no feasible action")
    row = policy.q_values(policy.state_key(state))
    best = None
    best_v = -math.inf
    for action in ACTION_PREFERENCE:
        if action in feasible and row[action] > best_v:
            best = action
            best_v = float(row[action])
    return best


def train_q(env_factory: Callable[[int], Environment], params: QParams | None = None) -> QPolicy:
    """Train a tabular policy, one calendar day per episode.

    env_factory(episode) must return a fresh (or reset) environment;
    exploration decays linearly from eps_start to eps_end.
    """
    params = params or QParams()
    rng = np.random.default_rng(params.seed)
    probe = env_factory(0)
    policy = QPolicy(
        table={},
        soc_buckets=params.soc_buckets,
        soc_lo=probe.battery_cfg.soc_floor,
        soc_hi=probe.battery_cfg.soc_max,
        granularity_min=probe.price.granularity_min,
        meta={"episodes": params.episodes, "seed": params.seed},
    )
    decay_span = max(1, params.episodes - 1)
    for episode in range(params.episodes):
        env = env_factory(episode)
        eps = params.eps_start + (params.eps_end - params.eps_start) * (episode / decay_span)
        day_done = False
        run_done = env.done
        while not (day_done or run_done):
            key = env.q_state(params.soc_buckets)
            feasible = env.feasible_actions()
            if rng.random() < eps:
                action = feasible[int(rng.integers(len(feasible)))]
            else:
                row = policy.q_values(key)
                action = max(
                    (a for a in ACTION_PREFERENCE if a in feasible),
                    key=lambda a: (row[a], -ACTION_PREFERENCE.index(a)),
                )
            _, rc, day_done, run_done = env.step(action)
            row = policy.q_values(key)
            if day_done or run_done:
                target = rc.r_net
            else:
                next_key = env.q_state(params.soc_buckets)
                next_row = policy.q_values(next_key)
                next_feasible = env.feasible_actions()
                target = rc.r_net + params.gamma * max(float(next_row[a]) for a in next_feasible)
            row[action] += params.lr * (target - row[action])
    return policy
