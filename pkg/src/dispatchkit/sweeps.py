"""Parameter sweeps over a config axis, with trade-off bookkeeping.

A sweep reruns the same scenario once per (value, seed), overriding a
single dotted config path each time, then adds per-value summary rows
with min-max normalized price and carbon totals.  The crossing value is
the first sweep value whose normalized carbon reaches its normalized
price; for a weight sweep that marks where the objective tips from
money-led to carbon-led dispatch.
"""

from __future__ import annotations

import copy
import csv
import json
import os
from dataclasses import dataclass, field

from .config import apply_overrides, resolve_config, with_seed
from .errors import ConfigInvalid
from .reporting import ensure_dir
from .runners import run

CSV_FIELDS = (
    "kind", "value", "seed",
    "price_total", "carbon_total", "deg_total", "net_total",
    "actions_active", "norm_price", "norm_carbon", "crossing",
)


@dataclass(frozen=True)
class SweepSpec:
    path: str
    values: tuple = ()
    seeds: tuple = (0,)

    def __post_init__(self):
        if not self.path:
            raise ConfigInvalid("sweep needs a config path to vary")
        if len(self.values) < 2:
            raise ConfigInvalid("sweep needs at least two values")
        if not self.seeds:
            raise ConfigInvalid("sweep needs at least one seed")


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[dict] = field(default_factory=list)
    crossing_value: float | None = None

    def points(self) -> list[dict]:
        return [r for r in self.rows if r["kind"] == "point"]

    def summaries(self) -> list[dict]:
        return [r for r in self.rows if r["kind"] == "summary"]


def _normalize(xs: list[float]) -> list[float]:
    lo, hi = min(xs), max(xs)
    if hi - lo == 0.0:
        return [0.0 for _ in xs]
    return [(x - lo) / (hi - lo) for x in xs]


def sweep(
    cfg: dict,
    spec: SweepSpec,
    optimizer: str = "exact",
    out_dir: str | None = None,
    base_dir: str = ".",
) -> SweepResult:
    """Run the scenario once per (value, seed) of the sweep axis."""
    result = SweepResult(spec=spec)
    by_value: dict = {}
    for value in spec.values:
        per_seed = []
        for seed in spec.seeds:
            work = copy.deepcopy(cfg)
            apply_overrides(work, [f"{spec.path}={value}"])
            rc = with_seed(resolve_config(work, base_dir=base_dir), seed)
            report = run(rc, optimizer=optimizer)
            totals = report.totals
            point = {
                "kind": "point",
                "value": value,
                "seed": seed,
                "price_total": totals["r_price"],
                "carbon_total": totals["r_carbon"],
                "deg_total": totals["r_deg"],
                "net_total": totals["r_net"],
                "actions_active": report.extras["actions_active"],
                "norm_price": "",
                "norm_carbon": "",
                "crossing": "",
            }
            result.rows.append(point)
            per_seed.append(point)
        n = len(per_seed)
        by_value[value] = {
            k: sum(p[k] for p in per_seed) / n
            for k in ("price_total", "carbon_total", "deg_total", "net_total", "actions_active")
        }

    values = list(spec.values)
    norm_price = _normalize([by_value[v]["price_total"] for v in values])
    norm_carbon = _normalize([by_value[v]["carbon_total"] for v in values])
    for i, v in enumerate(values):
        crossed = norm_carbon[i] >= norm_price[i]
        if crossed and result.crossing_value is None:
            result.crossing_value = v
        result.rows.append(
            {
                "kind": "summary",
                "value": v,
                "seed": "",
                **{k: by_value[v][k] for k in ("price_total", "carbon_total", "deg_total", "net_total")},
                "actions_active": by_value[v]["actions_active"],
                "norm_price": norm_price[i],
                "norm_carbon": norm_carbon[i],
                "crossing": int(crossed),
            }
        )

    if out_dir:
        ensure_dir(out_dir)
        with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(CSV_FIELDS))
            w.writeheader()
            w.writerows(result.rows)
        with open(os.path.join(out_dir, "sweep.json"), "w") as fh:
            json.dump(
                {
                    "path": spec.path,
                    "values": list(spec.values),
                    "seeds": list(spec.seeds),
                    "optimizer": optimizer,
                    "crossing_value": result.crossing_value,
                },
                fh,
                indent=2,
            )
    return result


def spec_from_config(cfg: dict) -> SweepSpec:
    """Read the sweep section of a config mapping."""
    section = cfg.get("sweep")
    if not isinstance(section, dict):
        raise ConfigInvalid("config has no sweep section")
    return SweepSpec(
        path=str(section.get("path", "")),
        values=tuple(section.get("values", ()) or ()),
        seeds=tuple(section.get("seeds", (0,)) or (0,)),
    )
