"""Command line entry point.

Verbs: run, sweep, schedule, events, bench, report.  Trailing
``key=value`` arguments override config entries (dotted paths, YAML
values).  Exit codes: 0 ok, 1 config problem, 2 data problem,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from .config import load_config_file, load_resolved, apply_overrides, resolve_config
from .errors import ConfigError, DataError, RuntimeFailure
from .reporting import RunReport, read_trace, svg_line_plot
from .runners import OPTIMIZERS, benchmark, event_runner, run, scheduled_runner
from .sweeps import spec_from_config, sweep
from .timeseries import load_table


def _add_common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("--config", required=config_required, help="YAML config file")
    p.add_argument("--optimizer", default="exact", choices=OPTIMIZERS)
    p.add_argument("--out", default=None, help="output directory (default: run.out_dir)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("overrides", nargs="*", help="config overrides, key.path=value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dispatchkit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run the configured scenario end to end")
    _add_common(p)
    p.add_argument("--plots", action="store_true", help="also write SVG plots")

    p = sub.add_parser("sweep", help="rerun over the config's sweep axis")
    _add_common(p)

    p = sub.add_parser("schedule", help="run on a virtual clock, one tick per cadence")
    _add_common(p)
    p.add_argument("--cadence-min", type=int, default=None)
    p.add_argument("--max-ticks", type=int, default=None)

    p = sub.add_parser("events", help="run from a timestamped row feed")
    _add_common(p)
    p.add_argument("--feed", default=None, help="CSV of timestamped rows (default: replay the configured data)")

    p = sub.add_parser("bench", help="time per-decision latency across optimizers")
    _add_common(p)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--optimizers", default="exact,sa,q", help="comma-separated optimizer list")

    p = sub.add_parser("report", help="summarize a finished run directory")
    p.add_argument("--out", required=True, help="directory holding report.json / trace.csv")
    p.add_argument("--plots", action="store_true", help="regenerate SVG plots from the trace")
    return parser


def _print_report(report: RunReport, out_dir: str | None):
    t = report.totals
    print(f"scenario {report.scenario}  optimizer {report.optimizer}  backend {report.backend}")
    print(f"days {report.days}  steps {report.steps}  decisions {report.decisions}")
    print(
        "r_price {r_price!r}  r_carbon {r_carbon!r}  r_deg {r_deg!r}  r_net {r_net!r}".format(**t)
    )
    print(f"decision latency {report.latency_mean_s:.6f}s mean, {report.latency_std_s:.6f}s std")
    if out_dir:
        print(f"wrote {out_dir}/report.json")


def _feed_from_file(path: str):
    table = load_table(path)
    first = table.column(table.names[0])
    for i in range(table.n_rows):
        yield first.timestamp_at(i), {n: float(table.columns[n].values[i]) for n in table.names}


def _cmd_run(args) -> int:
    rc = load_resolved(args.config, args.overrides)
    out = args.out or rc.out_dir
    report = run(rc, optimizer=args.optimizer, out_dir=out, seed=args.seed, plots=args.plots)
    _print_report(report, out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config_file(args.config)
    if args.overrides:
        apply_overrides(cfg, args.overrides)
    spec = spec_from_config(cfg)
    if args.seed is not None:
        spec = replace(spec, seeds=(args.seed,))
    base_dir = os.path.dirname(os.path.abspath(args.config))
    out = args.out or resolve_config(cfg, base_dir).out_dir
    result = sweep(cfg, spec, optimizer=args.optimizer, out_dir=out, base_dir=base_dir)
    for row in result.summaries():
        print(
            f"{spec.path}={row['value']}: price {row['price_total']:.4f} "
            f"carbon {row['carbon_total']:.4f} active {row['actions_active']:.1f}"
        )
    print(f"crossing value: {result.crossing_value}")
    print(f"wrote {out}/sweep.csv")
    return 0


def _cmd_schedule(args) -> int:
    rc = load_resolved(args.config, args.overrides)
    out = args.out or rc.out_dir
    report = scheduled_runner(
        rc,
        optimizer=args.optimizer,
        cadence_min=args.cadence_min,
        max_ticks=args.max_ticks,
        out_dir=out,
        seed=args.seed,
    )
    _print_report(report, out)
    print(f"ticks {report.extras['ticks']} at {report.extras['cadence_min']} min cadence")
    return 0


def _cmd_events(args) -> int:
    rc = load_resolved(args.config, args.overrides)
    out = args.out or rc.out_dir
    feed = _feed_from_file(args.feed) if args.feed else None
    report = event_runner(rc, optimizer=args.optimizer, feed=feed, out_dir=out, seed=args.seed)
    _print_report(report, out)
    print(f"rows consumed: {report.extras['rows_consumed']}")
    return 0


def _cmd_bench(args) -> int:
    rc = load_resolved(args.config, args.overrides)
    out = args.out or rc.out_dir
    names = tuple(s.strip() for s in args.optimizers.split(",") if s.strip())
    rows = benchmark(rc, optimizers=names, repeats=args.repeats, out_dir=out, seed=args.seed)
    for row in rows:
        extra = f"  (train {row['train_s']:.3f}s)" if row["train_s"] else ""
        print(
            f"{row['optimizer']:>6}: {row['latency_mean_s']:.6f}s mean, "
            f"{row['latency_std_s']:.6f}s std over {row['decisions']} decisions{extra}"
        )
    print(f"wrote {out}/bench.csv")
    return 0


def _cmd_report(args) -> int:
    import json

    path = os.path.join(args.out, "report.json")
    with open(path) as fh:
        data = json.load(fh)
    for key in ("scenario", "optimizer", "backend", "days", "steps", "decisions"):
        print(f"{key}: {data[key]}")
    for key, val in data["totals"].items():
        print(f"{key}: {val!r}")
    trace_path = os.path.join(args.out, "trace.csv")
    if args.plots and os.path.exists(trace_path):
        trace = read_trace(trace_path)
        svg_line_plot(
            os.path.join(args.out, "soc.svg"),
            {"soc": [r.soc for r in trace]},
            title="state of charge",
        )
        acc, cum = 0.0, []
        for r in trace:
            acc += r.r_net
            cum.append(acc)
        svg_line_plot(
            os.path.join(args.out, "reward.svg"),
            {"cumulative net reward": cum},
            title="cumulative net reward",
        )
        print(f"wrote {args.out}/soc.svg and {args.out}/reward.svg")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "schedule": _cmd_schedule,
    "events": _cmd_events,
    "bench": _cmd_bench,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except RuntimeFailure as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
