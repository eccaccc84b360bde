import itertools

import numpy as np
import pytest

from dispatchkit import (
    BatteryConfig,
    Environment,
    ObjectiveWeights,
    PlanningModel,
    TimeSeries,
    parse_timestamp,
)

T0 = parse_timestamp("2024-01-01T00:00")


def series(values, gran=60, start=T0, unit=""):
    return TimeSeries(start, gran, np.asarray(values, dtype=np.float64), unit)


def battery(**kw):
    base = dict(
        name="bat",
        capacity_kwh=10.0,
        pmax_charge_kw=-5.0,
        pmax_discharge_kw=5.0,
        eta_charge=1.0,
        eta_discharge=1.0,
        dod=1.0,
        soc_max=1.0,
        soc_init=0.5,
        min_soc_end=0.0,
    )
    base.update(kw)
    return BatteryConfig(**base)


def model(rewards, deltas=(0.0, -0.5, 0.5), soc0=0.5, lo=0.0, hi=1.0,
          end_min=0.0, energies=(0.0, -5.0, 5.0)):
    return PlanningModel(
        rewards=np.asarray(rewards, dtype=np.float64),
        deltas=deltas,
        energies=energies,
        soc0=soc0,
        soc_lo=lo,
        soc_hi=hi,
        end_min=end_min,
        t0=0,
        dt_h=1.0,
    )


def random_model(rng, horizon=24, end_min=0.0):
    """Instance with random per-step prices; optimum not degenerate."""
    prices = rng.uniform(-2.0, 12.0, horizon)
    e = np.array([0.0, -5.0, 5.0])
    return model(prices[:, None] * e[None, :], end_min=end_min)


def brute_force_objective(m: PlanningModel) -> float:
    """Best feasible objective by full enumeration; -inf when none.

    Vectorized over all 3^T plans so horizons up to ~10 stay cheap.
    """
    T = m.horizon
    n = 3 ** T
    plans = np.array(
        np.unravel_index(np.arange(n), (3,) * T)
    ).T.astype(np.int64)  # (n, T)
    deltas = np.asarray(m.deltas)
    socs = m.soc0 - np.cumsum(deltas[plans], axis=1)
    ok = ((socs >= m.soc_lo - 1e-12) & (socs <= m.soc_hi + 1e-12)).all(axis=1)
    ok &= socs[:, -1] >= m.end_min - 1e-12
    if not ok.any():
        return float("-inf")
    objs = m.rewards[np.arange(T)[None, :], plans].sum(axis=1)
    return float(objs[ok].max())


def brute_force_plans(m: PlanningModel):
    """(objective, plans) where plans is every argmax action tuple."""
    best = float("-inf")
    winners = []
    deltas = m.deltas
    for plan in itertools.product(range(3), repeat=m.horizon):
        soc = m.soc0
        feasible = True
        obj = 0.0
        for t, a in enumerate(plan):
            soc -= deltas[a]
            if not (m.soc_lo - 1e-12 <= soc <= m.soc_hi + 1e-12):
                feasible = False
                break
            obj += m.rewards[t, a]
        if not feasible or soc < m.end_min - 1e-12:
            continue
        if obj > best + 1e-12:
            best = obj
            winners = [plan]
        elif abs(obj - best) <= 1e-12:
            winners.append(plan)
    return best, winners


def spiky_model(seed: int) -> PlanningModel:
    """24h price curve: flat base, a few spikes up, a few dips down.

    Sparse-optimum shape typical of spot markets with scarcity hours.
    """
    rng = np.random.default_rng(seed)
    prices = 5.0 + rng.uniform(0.0, 0.5, 24)
    n_spike = int(rng.integers(2, 5))
    n_dip = int(rng.integers(2, 5))
    idx = rng.permutation(24)
    prices[idx[:n_spike]] += rng.uniform(5.0, 15.0, n_spike)
    prices[idx[n_spike:n_spike + n_dip]] -= rng.uniform(2.0, 4.0, n_dip)
    e = np.array([0.0, -5.0, 5.0])
    return model(prices[:, None] * e[None, :])


def ea_env(prices, gran=60, bat=None, weights=None, **kw):
    return Environment(
        battery=bat or battery(),
        price=series(prices, gran=gran),
        weights=weights or ObjectiveWeights(),
        **kw,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
