"""Command-line entry point: synth, learn, simulate, sweep and timebench."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timedelta
from functools import lru_cache

import numpy as np

from .config import dump_config, load_config, make_config
from .core import ValidationError
from .demand import build_value_table, load_value_table, save_value_table
from .engine import PIPELINES, PipelineConfig, canonical_pipeline, run
from .events import write_events
from .ingest import SkipReport, TimeWindow, load_city_map, load_trips, parse_column_map, save_city_map, write_trips
from .metrics import write_summary
from .synthetic import HISTORY_SEED_OFFSET, SCENARIOS, build_scenario, generate_synthetic

log = logging.getLogger("ridepool")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
SWEEPABLE = ("fleet_size", "theta_ctr")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _scenario_config(args, **extra):
    overrides = {"seed": getattr(args, "seed", None), **extra}
    if getattr(args, "config", None):
        return load_config(args.config, **overrides)
    return make_config(**overrides)


def _window(cfg) -> TimeWindow:
    return TimeWindow.parse(cfg.window_start or "00:00:00", cfg.window_end or "23:59:59")


def _load_file_trips(path, city, cfg, column_map):
    report = SkipReport()
    trips = load_trips(path, city, _window(cfg), column_map=parse_column_map(column_map),
                       patience=cfg.patience_seconds, base_fare=cfg.base_fare,
                       per_hop_fare=cfg.per_hop_fare, report=report)
    print(report.line(path), file=sys.stderr)
    return trips


@lru_cache(maxsize=8)
def _inputs(scenario, trips_path, map_path, values_path, column_map, seed, cfg_items):
    """(trips, city, value table, horizon) for a built-in scenario or trip/map files."""
    cfg = make_config(dict(cfg_items))
    if scenario:
        sc = build_scenario(scenario, seed=seed, gamma=cfg.gamma)
        trips, city, table, horizon = sc.trips, sc.city, sc.values, sc.horizon
    else:
        if not trips_path or not map_path:
            raise ValidationError("either --scenario or both --trips and --map are required")
        city = load_city_map(map_path)
        trips = _load_file_trips(trips_path, city, cfg, column_map)
        table = None
        horizon = _window(cfg).seconds
    if values_path:
        table = load_value_table(values_path)
    if table is not None and set(table.zone_ids) != set(city.zone_ids):
        raise ValidationError("value table zones do not match the city map")
    return trips, city, table, horizon


def _resolve(args, cfg, seed=None):
    items = tuple(sorted(dataclasses.asdict(cfg).items()))
    return _inputs(args.scenario, args.trips, args.map, args.values, args.column_map,
                   cfg.seed if seed is None else seed, items)


# -- subcommands ----------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = _scenario_config(args)
    os.makedirs(args.out_dir, exist_ok=True)
    make = SCENARIOS.get(args.scenario)
    if make is None:
        raise ValidationError(f"unknown scenario {args.scenario!r}")
    day0 = datetime(2019, 1, 1)
    spec = make(seed=cfg.seed)
    trips, city = generate_synthetic(spec)
    end = timedelta(seconds=spec.cycles * spec.cycle_seconds - 1)
    conf = dataclasses.replace(cfg, window_start="00:00:00", window_end=str(end).zfill(8),
                               cycle_minutes=spec.cycle_seconds / 60)
    with open(os.path.join(args.out_dir, "scenario.conf"), "w") as fh:
        fh.write(dump_config(conf))
    save_city_map(city, os.path.join(args.out_dir, "map.csv"))
    write_trips(trips, os.path.join(args.out_dir, "trips.csv"), day0)
    for i in range(args.history_days):
        hist, _ = generate_synthetic(make(seed=cfg.seed + HISTORY_SEED_OFFSET + i))
        write_trips(hist, os.path.join(args.out_dir, f"history_{i}.csv"), day0 - timedelta(days=i + 1))
    print(f"wrote {len(trips)} trips and {args.history_days} history day(s) to {args.out_dir}")
    return EXIT_OK


def cmd_learn(args) -> int:
    cfg = _scenario_config(args, gamma=args.gamma, cycle_minutes=args.cycle_minutes)
    city = load_city_map(args.map)
    dt = cfg.cycle_seconds
    T = max(1, math.ceil(_window(cfg).seconds / dt))
    events = []
    for path in args.trips:
        for r in _load_file_trips(path, city, cfg, args.column_map):
            events.append((r.t // dt, r.o))
    table = build_value_table(events, cfg.gamma, T, city.zone_ids, days=max(1, len(args.trips)))
    out = args.output or os.path.join(args.out_dir, "values.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    save_value_table(table, out)
    print(f"value table ({T} timestamps x {len(city)} zones) written to {out}")
    return EXIT_OK


def simulate_once(args, cfg, pipeline, seed=None):
    trips, city, table, horizon = _resolve(args, cfg, seed)
    pc = PipelineConfig(pipeline, cfg)
    return run(pc, trips, city, table if pc.uses_ardl else None, horizon=horizon,
               check_invariants=not getattr(args, "fast", False))


def cmd_simulate(args) -> int:
    cfg = _scenario_config(args, fleet_size=args.fleet_size, theta_ctr=args.theta_ctr)
    pipeline = canonical_pipeline(args.pipeline)
    result = simulate_once(args, cfg, pipeline)
    os.makedirs(args.out_dir, exist_ok=True)
    write_summary(result.summary, os.path.join(args.out_dir, "metrics.csv"))
    write_events(result.events, os.path.join(args.out_dir, "events.log"))
    with open(os.path.join(args.out_dir, "effective.conf"), "w") as fh:
        fh.write(dump_config(cfg))
    s = result.summary
    print(f"{pipeline}: serving_rate={s['serving_rate']:.4f} served={s['served_requests']}/"
          f"{s['total_requests']} cycles={result.cycles} -> {args.out_dir}")
    return EXIT_OK


def _sweep_job(job):
    args, cfg_dict, param, value, pipeline, seed = job
    row = {param: value, "pipeline": pipeline, "seed": seed}
    try:
        cfg = make_config({**cfg_dict, param: value, "seed": seed})
        result = simulate_once(args, cfg, pipeline, seed)
        row.update(result.summary)
        row["error"] = ""
    except Exception as exc:  # recorded per point; the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_rows(args, cfg, param, values, pipelines, seeds, workers=1):
    base = dataclasses.asdict(cfg)
    jobs = [(args, base, param, v, p, s) for v in values for p in pipelines for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    order = {p: i for i, p in enumerate(PIPELINES)}
    rows.sort(key=lambda r: (r[param], order[r["pipeline"]], r["seed"]))
    return rows


def _num(text, kind):
    try:
        return kind(text)
    except ValueError:
        raise ValidationError(f"bad sweep value {text!r}") from None


def cmd_sweep(args) -> int:
    cfg = _scenario_config(args, fleet_size=args.fleet_size, theta_ctr=args.theta_ctr)
    if args.vary not in SWEEPABLE:
        raise ValidationError(f"--vary must be one of {SWEEPABLE}")
    kind = int if args.vary == "fleet_size" else float
    values = [_num(v, kind) for v in args.points.split(",") if v.strip()]
    if not values:
        raise ValidationError("--points must list at least one value")
    for v in values:
        make_config(dataclasses.asdict(cfg), **{args.vary: v})
    pipelines = [canonical_pipeline(p) for p in args.pipelines.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    rows = sweep_rows(args, cfg, args.vary, values, pipelines, seeds, args.workers)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "sweep.csv")
    fields = [args.vary, "pipeline", "seed"]
    for r in rows:
        fields += [k for k in r if k not in fields and k != "error"]
    fields.append("error")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    failed = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} sweep rows ({failed} failed) written to {path}")
    return EXIT_OK


def cmd_timebench(args) -> int:
    cfg = _scenario_config(args, fleet_size=args.fleet_size)
    result = simulate_once(args, cfg, canonical_pipeline(args.pipeline))
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "timing.csv")
    with open(path, "w") as fh:
        fh.write("algorithm,mean_seconds_per_cycle,cycles\n")
        for name, xs in result.timings.items():
            if xs:
                fh.write(f"{name},{float(np.mean(xs))!r},{len(xs)}\n")
                print(f"{name:5s} {np.mean(xs) * 1000:8.3f} ms/cycle over {len(xs)} cycles")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ridepool", description="City-scale dynamic ridesharing simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, inputs=True):
        p.add_argument("--config", help="key = value scenario file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", default="out")
        if inputs:
            p.add_argument("--trips", help="trip file")
            p.add_argument("--map", help="city map file")
            p.add_argument("--values", help="serialized value table")
            p.add_argument("--column-map", help="name=Source Column,... for non-canonical trip files")
            p.add_argument("--scenario", choices=sorted(SCENARIOS), help="built-in synthetic scenario")
            p.add_argument("--fast", action="store_true", help="skip per-cycle invariant checks")

    p = sub.add_parser("synth", help="write a built-in synthetic scenario to files")
    common(p, inputs=False)
    p.add_argument("--scenario", choices=sorted(SCENARIOS), default="downtown")
    p.add_argument("--history-days", type=int, default=1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("learn", help="learn a value table from historical trip files")
    common(p, inputs=False)
    p.add_argument("--trips", nargs="+", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--column-map")
    p.add_argument("--gamma", type=float)
    p.add_argument("--cycle-minutes", type=float)
    p.add_argument("--output", help="value-table path (default OUT_DIR/values.csv)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("simulate", help="run one simulation")
    common(p)
    p.add_argument("--pipeline", default="ARDL+CP+GIM")
    p.add_argument("--fleet-size", type=int)
    p.add_argument("--theta-ctr", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep fleet size or CTR threshold across pipelines and seeds")
    common(p)
    p.add_argument("--vary", default="fleet_size", choices=SWEEPABLE)
    p.add_argument("--points", required=True, help="comma-separated parameter values")
    p.add_argument("--pipelines", default=",".join(PIPELINES))
    p.add_argument("--seeds", default="0")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--fleet-size", type=int, help="base value when not the swept parameter")
    p.add_argument("--theta-ctr", type=float, help="base value when not the swept parameter")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("timebench", help="mean per-cycle running time of each algorithm")
    common(p)
    p.add_argument("--pipeline", default="ARDL+CP+GIM")
    p.add_argument("--fleet-size", type=int)
    p.set_defaults(func=cmd_timebench)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
