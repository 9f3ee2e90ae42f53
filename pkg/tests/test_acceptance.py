"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

The lines are printed in the terminal summary (section "acceptance criteria").
"""

import os
import time

import numpy as np
import pytest

from ridepool.cli import main
from ridepool.core import CityMap, ScenarioConfig, TripRequest, trip_direction
from ridepool.demand import build_value_table
from ridepool.engine import PIPELINES, PipelineConfig, run
from ridepool.ingest import TimeWindow, load_city_map, load_trips
from ridepool.metrics import fare
from ridepool.pooling import angle_between, pool_requests
from ridepool.synthetic import build_scenario, chicago_scale_spec, generate_synthetic, history_events

from conftest import ACCEPTANCE_LINES

TIE = 0.005  # half a percentage point


def verdict(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def discounted_oracle(counts, gamma):
    T = counts.shape[0]
    k = np.arange(T)
    lag = k[None, :] - k[:, None]
    G = np.where(lag >= 0, gamma ** np.clip(lag, 0, None), 0.0)
    return G @ counts


def test_c01_value_iteration_oracle():
    rng = np.random.default_rng(2024)
    worst, t0 = 0.0, time.perf_counter()
    for _ in range(200):
        T, Z = int(rng.integers(1, 21)), int(rng.integers(1, 11))
        gamma = float(rng.uniform(0, 1))
        counts = rng.integers(0, 11, size=(T, Z))
        t_idx, z_idx = np.nonzero(counts)
        events = [(int(t), int(z)) for t, z in zip(t_idx, z_idx) for _ in range(counts[t, z])]
        table = build_value_table(events, gamma, T, range(Z))
        worst = max(worst, float(np.abs(table.values - discounted_oracle(counts, gamma)).max()))
    secs = time.perf_counter() - t0
    verdict(1, worst <= 1e-9 and secs < 1.0,
            f"200 instances, max |V - oracle| = {worst:.2e} (tol 1e-9), {secs:.3f} s (limit 1 s)")


def test_c02_pooling_structure():
    grid = CityMap.grid(11, 11)
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    problems = []
    n_tables = 0
    for theta in (10, 30, 45, 60, 90):
        for _ in range(40):
            origin = int(rng.integers(121))
            dests = rng.integers(0, 121, size=int(rng.integers(0, 80)))
            reqs = [TripRequest(0, i, origin, int(d)) for i, d in enumerate(dests)]
            table = pool_requests(reqs, theta, 4, grid, origin)
            n_tables += 1
            if len(table.buckets) != 360 // theta:
                problems.append(f"theta {theta}: {len(table.buckets)} buckets")
            for c in table.clusters():
                if len(c) > 4:
                    problems.append(f"cluster of {len(c)}")
                dirs = [trip_direction(r, grid) for r in c.members if r.o != r.d]
                for i in range(len(dirs)):
                    for j in range(i + 1, len(dirs)):
                        if not angle_between(dirs[i], dirs[j]) < theta:
                            problems.append(f"theta {theta}: pair angle {angle_between(dirs[i], dirs[j]):.2f}")
    secs = time.perf_counter() - t0
    verdict(2, not problems and secs < 1.0,
            f"{n_tables} index tables over theta 10/30/45/60/90, {len(problems)} violations, "
            f"{secs:.3f} s (limit 1 s)")


THETAS = (10.0, 30.0, 45.0, 60.0, 90.0)


@pytest.fixture(scope="module")
def theta_sweep():
    """Commute scenario (10x10 grid, common-direction demand), ARDL+CP+GIM, 300 taxis, seeds 0-2."""
    t0 = time.perf_counter()
    seeds = (0, 1, 2)
    scenarios = {s: build_scenario("commute", seed=s) for s in seeds}
    rows = {}
    for theta in THETAS:
        acc = []
        for s in seeds:
            sc = scenarios[s]
            cfg = PipelineConfig("ARDL+CP+GIM", ScenarioConfig(fleet_size=300, seed=s, theta_ctr=theta))
            summary = run(cfg, sc.trips, sc.city, sc.values, sc.horizon).summary
            acc.append([summary[k] for k in ("poolability_1", "poolability_4",
                                             "avg_extra_trip_time_min", "avg_savings")])
        rows[theta] = np.mean(acc, axis=0)
    return rows, time.perf_counter() - t0


def non_decreasing(xs):
    return all(b >= a for a, b in zip(xs, xs[1:]))


@pytest.mark.slow
def test_c03_poolability_trend(theta_sweep):
    rows, secs = theta_sweep
    p1 = [rows[t][0] for t in THETAS]
    p4 = [rows[t][1] for t in THETAS]
    ok = non_decreasing(p4) and non_decreasing(p1[::-1]) and p4[-1] > p1[-1] and secs < 30
    verdict(3, ok, "poolability(4) " + " ".join(f"{x:.3f}" for x in p4)
            + " | poolability(1) " + " ".join(f"{x:.3f}" for x in p1) + f" | {secs:.1f} s (limit 30 s)")


@pytest.mark.slow
def test_c04_fare_tradeoff(theta_sweep):
    rows, _ = theta_sweep
    te = [rows[t][2] for t in THETAS]
    sav = [rows[t][3] for t in THETAS]
    spot = fare(10, 2.5, 0.2)
    ok = non_decreasing(te) and non_decreasing(sav) and abs(spot - 6.0653) <= 1e-4
    verdict(4, ok, "avg T_e (min) " + " ".join(f"{x:.3f}" for x in te)
            + " | avg savings " + " ".join(f"{x:.3f}" for x in sav) + f" | fare(10,2.5,0.2) = {spot:.5f}")


FLEETS = (100, 130, 160, 200)
SEEDS = tuple(range(10))


@pytest.fixture(scope="module")
def pipeline_benchmark():
    """Downtown scenario (8x8 grid, drifting hotspot), 4 fleet sizes x 4 pipelines x 10 seeds."""
    t0 = time.perf_counter()
    scenarios = {s: build_scenario("downtown", seed=s) for s in SEEDS}
    serving, calling = {}, {}
    for fleet in FLEETS:
        for p in PIPELINES:
            sr, ct = [], []
            for s in SEEDS:
                sc = scenarios[s]
                cfg = PipelineConfig(p, ScenarioConfig(fleet_size=fleet, seed=s))
                summary = run(cfg, sc.trips, sc.city, sc.values if "ARDL" in p else None, sc.horizon).summary
                sr.append(summary["serving_rate"])
                ct.append(summary["avg_calling_time_min"])
            serving[fleet, p] = float(np.mean(sr))
            calling[fleet, p] = float(np.mean(ct))
    return serving, calling, time.perf_counter() - t0


@pytest.mark.slow
def test_c05_pipeline_ordering(pipeline_benchmark):
    serving, _, secs = pipeline_benchmark
    order = ("ARDL+CP+GIM", "ARDL+CP", "SMW+CP", "SMW")
    bad = [(f, hi, lo) for f in FLEETS for hi, lo in zip(order, order[1:])
           if serving[f, hi] < serving[f, lo] - TIE]
    table = "; ".join(f"{f}: " + "/".join(f"{serving[f, p]:.3f}" for p in order) for f in FLEETS)
    verdict(5, not bad and secs < 300,
            f"serving rate GIM/ARDL+CP/SMW+CP/SMW by fleet, {len(SEEDS)} seeds: {table} | "
            f"{len(bad)} violations | {secs:.1f} s (limit 300 s)")


@pytest.mark.slow
def test_c06_fleet_monotonicity(pipeline_benchmark):
    serving, _, _ = pipeline_benchmark
    bad = [(p, a, b) for p in PIPELINES for a, b in zip(FLEETS, FLEETS[1:])
           if serving[b, p] < serving[a, p] - TIE]
    detail = "; ".join(f"{p}: " + "/".join(f"{serving[f, p]:.3f}" for f in FLEETS) for p in PIPELINES)
    verdict(6, not bad, f"serving rate over fleets {FLEETS}: {detail} | {len(bad)} violations")


@pytest.mark.slow
def test_c07_calling_time_ordering(pipeline_benchmark):
    _, calling, _ = pipeline_benchmark
    bad = []
    for f in FLEETS:
        ranked = sorted(PIPELINES, key=lambda p: calling[f, p])
        if ranked[:2] != ["ARDL+CP+GIM", "ARDL+CP"]:
            bad.append(f)
    detail = "; ".join(f"{f}: " + "/".join(f"{calling[f, p]:.2f}" for p in PIPELINES) for f in FLEETS)
    verdict(7, not bad, f"avg calling time (min) SMW/SMW+CP/ARDL+CP/GIM: {detail} | "
                        f"fleets out of order: {bad}")


@pytest.mark.slow
def test_c08_timing_at_city_scale():
    spec = chicago_scale_spec(seed=0)
    trips, city = generate_synthetic(spec)
    history, _ = generate_synthetic(chicago_scale_spec(seed=1))
    table = build_value_table(history_events(history, spec.cycle_seconds), 0.8, spec.cycles, city.zone_ids)
    cfg = PipelineConfig("ARDL+CP+GIM", ScenarioConfig(fleet_size=316, seed=0))
    res = run(cfg, trips, city, table, spec.cycles * spec.cycle_seconds, check_invariants=False)
    ms = {k: 1000 * float(np.mean(v)) for k, v in res.timings.items() if v}
    limits = {"CP": 60.0, "ARDL": 340.0, "GIM": 500.0}
    ok = all(ms[k] <= lim for k, lim in limits.items())
    verdict(8, ok, f"{len(trips)} requests, {len(city)} zones, {res.cycles} cycles, 316 taxis: "
            + ", ".join(f"{k} {ms[k]:.2f} ms (limit {limits[k]:.0f})" for k in limits))


def test_c09_real_export():
    trips_path = os.environ.get("RIDEPOOL_CHICAGO_TRIPS")
    map_path = os.environ.get("RIDEPOOL_CHICAGO_MAP")
    if not (trips_path and map_path):
        line = ("criterion  9: SUBSTITUTED  no real trip export supplied (set RIDEPOOL_CHICAGO_TRIPS and "
                "RIDEPOOL_CHICAGO_MAP); covered by criteria 1-8")
        ACCEPTANCE_LINES.append(line)
        pytest.skip(line)
    history_path = os.environ.get("RIDEPOOL_CHICAGO_HISTORY", trips_path)
    city = load_city_map(map_path)
    window = TimeWindow.parse("11:00:00", "23:59:59")
    trips = load_trips(trips_path, city, window)
    history = load_trips(history_path, city, window)
    T = window.seconds // 180
    table = build_value_table(history_events(history, 180), 0.8, T, city.zone_ids)
    cfg = PipelineConfig("ARDL+CP+GIM", ScenarioConfig(fleet_size=316))
    sr = run(cfg, trips, city, table, window.seconds, check_invariants=False).summary["serving_rate"]
    verdict(9, abs(sr - 0.90) <= 0.05, f"{len(trips)} requests, serving rate {sr:.4f} (target 0.90 +/- 0.05)")


def test_c10_determinism(tmp_path):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main(["simulate", "--scenario", "downtown", "--seed", "3", "--fleet-size", "80",
                     "--out-dir", str(d)]) == 0
        outs.append(d)
    same = {f: (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in ("events.log", "metrics.csv")}
    size = len((outs[0] / "events.log").read_bytes())
    verdict(10, all(same.values()),
            f"two runs, same config+seed: events.log identical={same['events.log']} ({size} bytes), "
            f"metrics.csv identical={same['metrics.csv']}")
