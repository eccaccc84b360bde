"""Run reports, trace files and small static SVG plots.

A trace is the per-step record of a run; report totals are computed by
summing the trace (never tracked separately), so the two cannot
disagree.  Plots are hand-rolled SVG polylines to keep the dependency
footprint at numpy+yaml.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

from .timeseries import Timestamp, format_timestamp

TRACE_FIELDS = ("t", "timestamp", "action", "soc", "r_price", "r_carbon", "r_deg", "r_net")


@dataclass
class TraceRow:
    t: int
    timestamp: Timestamp
    action: str
    soc: float
    r_price: float
    r_carbon: float
    r_deg: float
    r_net: float


@dataclass
class RunReport:
    scenario: str
    optimizer: str
    backend: str
    days: int
    steps: int
    decisions: int
    totals: dict
    latency_mean_s: float
    latency_std_s: float
    trace_path: str | None = None
    extras: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)


def compute_totals(trace: list[TraceRow]) -> dict:
    """Sum the trace; the report's single source of truth."""
    totals = {"r_price": 0.0, "r_carbon": 0.0, "r_deg": 0.0, "r_net": 0.0}
    for row in trace:
        totals["r_price"] += row.r_price
        totals["r_carbon"] += row.r_carbon
        totals["r_deg"] += row.r_deg
        totals["r_net"] += row.r_net
    return totals


def write_trace(path: str, trace: list[TraceRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for row in trace:
            w.writerow(
                [
                    row.t,
                    format_timestamp(row.timestamp),
                    row.action,
                    repr(row.soc),
                    repr(row.r_price),
                    repr(row.r_carbon),
                    repr(row.r_deg),
                    repr(row.r_net),
                ]
            )


def read_trace(path: str) -> list[TraceRow]:
    """Inverse of write_trace; round-trips floats exactly."""
    from .timeseries import parse_timestamp

    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_FIELDS:
            raise ValueError(f"{path} is not a trace file")
        for rec in reader:
            out.append(
                TraceRow(
                    t=int(rec["t"]),
                    timestamp=parse_timestamp(rec["timestamp"]),
                    action=rec["action"],
                    soc=float(rec["soc"]),
                    r_price=float(rec["r_price"]),
                    r_carbon=float(rec["r_carbon"]),
                    r_deg=float(rec["r_deg"]),
                    r_net=float(rec["r_net"]),
                )
            )
    return out


def write_report(path: str, report: RunReport) -> None:
    with open(path, "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def latency_stats(latencies: list[float]) -> tuple[float, float]:
    """Mean and population standard deviation, 0.0 for empty input."""
    if not latencies:
        return 0.0, 0.0
    n = len(latencies)
    mean = sum(latencies) / n
    var = sum((x - mean) ** 2 for x in latencies) / n
    return mean, math.sqrt(var)


# -- svg ---------------------------------------------------------------------

_PALETTE = ("#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed")


def svg_line_plot(
    path: str,
    series: dict[str, list[float]],
    title: str = "",
    width: int = 840,
    height: int = 360,
) -> None:
    """Static line plot of one or more equal-length series."""
    pad = 48
    inner_w = width - 2 * pad
    inner_h = height - 2 * pad
    all_vals = [v for vs in series.values() for v in vs]
    if not all_vals:
        raise ValueError("nothing to plot")
    vmin, vmax = min(all_vals), max(all_vals)
    if vmin == vmax:
        vmin -= 1.0
        vmax += 1.0
    n = max(len(vs) for vs in series.values())

    def sx(i: int) -> float:
        return pad + (inner_w * i / max(1, n - 1))

    def sy(v: float) -> float:
        return pad + inner_h * (1.0 - (v - vmin) / (vmax - vmin))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="24" font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="#999"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="#999"/>',
        f'<text x="6" y="{pad}" font-family="sans-serif" font-size="11">{vmax:.3g}</text>',
        f'<text x="6" y="{height - pad}" font-family="sans-serif" font-size="11">{vmin:.3g}</text>',
    ]
    for idx, (name, vs) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(vs))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{pad + 8 + idx * 140}" y="{height - 10}" font-family="sans-serif" '
            f'font-size="12" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
