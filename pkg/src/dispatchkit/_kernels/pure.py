"""Pure-Python kernels: plan evaluation and the exact lattice solver.

This module is the reference semantics; the compiled backend in
_core.pyx mirrors it expression for expression.  Any change to the
arithmetic here must be made there too, in the same order, or the two
backends drift apart at the last bit.

Both kernels work on a scenario-agnostic problem shape:
  rewards[t][a]  reward for taking action a at step t (already weighted)
  deltas[a]      state-of-charge drop caused by action a (charge < 0)
  soc' = soc - deltas[a], feasible iff lo <= soc' <= hi
  terminal constraint soc_T >= end_min (pass -inf to disable)
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"

NEG_INF = float("-inf")


def evaluate_plan(actions, rewards, deltas, soc0, lo, hi, end_min):
    """Score an action sequence without enforcing feasibility.

    Returns (objective, violation count, final soc).  Violations count
    each step whose landing soc leaves [lo, hi] plus one if the final
    soc misses end_min; the trajectory keeps integrating regardless so
    stochastic search can grade infeasible candidates smoothly.
    """
    acts = np.ascontiguousarray(actions, dtype=np.int64).tolist()
    rew = np.ascontiguousarray(rewards, dtype=np.float64).tolist()
    dls = [float(d) for d in deltas]
    soc = float(soc0)
    obj = 0.0
    violations = 0
    for t, a in enumerate(acts):
        soc = soc - dls[a]
        if not (lo <= soc <= hi):
            violations += 1
        obj += rew[t][a]
    if soc < end_min:
        violations += 1
    return obj, violations, soc


# Action sweep order everywhere a tie can occur: idle, discharge, charge.
_PREF = (0, 2, 1)


def solve_lattice(rewards, deltas, soc0, lo, hi, end_min, merge_eps=1e-9):
    """Optimal action sequence by dynamic programming over reachable socs.

    States within merge_eps of each other collapse (smallest survives),
    which keeps the lattice polynomial.  Returns (actions int64 array,
    objective) or (None, -inf) when no sequence satisfies the terminal
    constraint.
    """
    rew = np.ascontiguousarray(rewards, dtype=np.float64)
    horizon = rew.shape[0]
    dls = [float(d) for d in deltas]
    inv_eps = 1.0 / merge_eps

    # forward reachability; states per level sorted ascending
    levels: list[list[float]] = [[float(soc0)]]
    level_keys: list[list[int]] = [[math.floor(float(soc0) * inv_eps + 0.5)]]
    trans: list[list[list[int]]] = []
    for t in range(horizon):
        cand: list[float] = []
        for s in levels[t]:
            for a in range(3):
                s2 = s - dls[a]
                if lo <= s2 <= hi:
                    cand.append(s2)
        cand.sort()
        reps: list[float] = []
        keys: list[int] = []
        prev_key = None
        for s2 in cand:
            k = math.floor(s2 * inv_eps + 0.5)
            if k != prev_key:
                reps.append(s2)
                keys.append(k)
                prev_key = k
        tr = []
        for s in levels[t]:
            row = []
            for a in range(3):
                s2 = s - dls[a]
                if lo <= s2 <= hi:
                    k = math.floor(s2 * inv_eps + 0.5)
                    row.append(_bisect_key(keys, k))
                else:
                    row.append(-1)
            tr.append(row)
        trans.append(tr)
        levels.append(reps)
        level_keys.append(keys)
        if not reps:
            return None, NEG_INF

    # backward value pass
    values = [0.0 if s >= end_min else NEG_INF for s in levels[horizon]]
    choices: list[list[int]] = []
    for t in range(horizon - 1, -1, -1):
        vt = []
        ct = []
        for i in range(len(levels[t])):
            best = NEG_INF
            best_a = -1
            for a in _PREF:
                j = trans[t][i][a]
                if j >= 0 and values[j] != NEG_INF:
                    v = rew[t, a] + values[j]
                    if v > best:
                        best = v
                        best_a = a
            vt.append(best)
            ct.append(best_a)
        values = vt
        choices.append(ct)
    choices.reverse()

    if values[0] == NEG_INF:
        return None, NEG_INF

    objective = values[0]
    actions = np.empty(horizon, dtype=np.int64)
    i = 0
    for t in range(horizon):
        a = choices[t][i]
        actions[t] = a
        i = trans[t][i][a]
    return actions, float(objective)


def _bisect_key(keys: list[int], k: int) -> int:
    lo_i, hi_i = 0, len(keys)
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        if keys[mid] < k:
            lo_i = mid + 1
        else:
            hi_i = mid
    if lo_i < len(keys) and keys[lo_i] == k:
        return lo_i
    return -1
