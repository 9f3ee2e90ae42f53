"""Rider, driver and platform metrics accumulated from simulation events."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from .events import Event


def fare(F: float, extra_minutes: float, lam: float) -> float:
    """Pooled-ride fare: the solo fare discounted by exp(-lambda * extra trip minutes)."""
    return F * math.exp(-lam * extra_minutes)


@dataclass
class RiderRecord:
    t: int
    base_fare: float
    solo_hops: int
    k: int = 1
    matched_at: Optional[int] = None
    delivered_at: Optional[int] = None
    occupancy: int = 0
    taxi_id: Optional[int] = None
    expired: bool = False
    extra_minutes: float = 0.0
    fare: float = 0.0

    @property
    def served(self) -> bool:
        return self.delivered_at is not None

    @property
    def calling_minutes(self) -> float:
        return (self.matched_at - self.t) / 60.0


@dataclass
class DriverRecord:
    fares: List[float] = field(default_factory=list)
    cost_units: float = 0.0
    cycles: int = 0
    busy_cycles: int = 0


@dataclass
class MetricsLedger:
    cycle_seconds: int = 180
    fare_lambda: float = 0.2
    p_taxi: float = 0.7
    money_per_cost: float = 2.0
    capacity: int = 4
    riders: Dict[int, RiderRecord] = field(default_factory=dict)
    drivers: Dict[int, DriverRecord] = field(default_factory=dict)
    n_cycles: int = 0

    @property
    def total_seconds(self) -> int:
        return self.n_cycles * self.cycle_seconds

    @property
    def served(self) -> List[RiderRecord]:
        return [r for r in self.riders.values() if r.served]

    @property
    def zero_demand(self) -> bool:
        return not self.riders

    def occupancy_histogram(self) -> Dict[int, int]:
        hist = {n: 0 for n in range(1, self.capacity + 1)}
        for r in self.riders.values():
            if r.served:
                hist[r.occupancy] = hist.get(r.occupancy, 0) + 1
        return hist


class LedgerBuilder:
    """Folds events into a MetricsLedger; the engine and log replay share this path."""

    def __init__(self, ledger: MetricsLedger = None):
        self.ledger = ledger or MetricsLedger()

    def feed(self, events: Iterable[Event]) -> MetricsLedger:
        for e in events:
            self.consume(e)
        return self.ledger

    def consume(self, e: Event) -> None:
        L = self.ledger
        kind = e[1]
        if kind == "config":
            cfg = e[2]
            L.cycle_seconds = int(cfg["cycle_seconds"])
            L.fare_lambda = float(cfg["fare_lambda"])
            L.p_taxi = float(cfg["p_taxi"])
            L.money_per_cost = float(cfg["money_per_cost"])
            L.capacity = int(cfg["capacity"])
        elif kind == "cycle":
            L.n_cycles += 1
        elif kind == "release":
            _, _, rid, t, o, d, k, p, F, hops = e
            L.riders[rid] = RiderRecord(t, F, hops, k)
        elif kind == "expire":
            L.riders[e[2]].expired = True
        elif kind == "match":
            _, _, zone, taxi, supplier, issued_at, members, scores = e
            seats = sum(L.riders[m].k for m in members)
            for m in members:
                r = L.riders[m]
                r.matched_at = issued_at
                r.taxi_id = taxi
                r.occupancy = seats
        elif kind == "dropoff":
            _, _, taxi, rid, time = e
            r = L.riders[rid]
            r.delivered_at = time
            extra = (time - r.matched_at) - r.solo_hops * L.cycle_seconds
            r.extra_minutes = extra / 60.0
            r.fare = fare(r.base_fare, r.extra_minutes, L.fare_lambda)
            L.drivers.setdefault(taxi, DriverRecord()).fares.append(r.fare)
        elif kind == "move":
            _, _, taxi, src, dst, cost, busy = e
            d = L.drivers.setdefault(taxi, DriverRecord())
            d.cost_units += cost
            d.cycles += 1
            d.busy_cycles += busy


def ledger_from_events(events: Iterable[Event]) -> MetricsLedger:
    return LedgerBuilder().feed(events)


def driver_profit(driver: DriverRecord, p_taxi: float, money_per_cost: float) -> float:
    return sum(p_taxi * f for f in driver.fares) - driver.cost_units * money_per_cost


def platform_revenue(ledger: MetricsLedger) -> float:
    return sum((1 - ledger.p_taxi) * r.fare for r in ledger.riders.values() if r.served)


def serving_rate(ledger: MetricsLedger) -> float:
    """|R+| / |R|; 1.0 when there was no demand (check ``ledger.zero_demand``)."""
    if not ledger.riders:
        return 1.0
    return len(ledger.served) / len(ledger.riders)


def taxi_utilization(ledger: MetricsLedger) -> float:
    total = ledger.total_seconds
    if total <= 0:
        raise ValueError("taxi utilization needs a positive observation period")
    if not ledger.drivers:
        return 0.0
    per_taxi = []
    for d in ledger.drivers.values():
        idle = (ledger.n_cycles - d.busy_cycles) * ledger.cycle_seconds
        per_taxi.append((total - idle) / total)
    return sum(per_taxi) / len(per_taxi)


def poolability(ledger: MetricsLedger, n: int) -> float:
    if not 1 <= n <= ledger.capacity:
        raise ValueError(f"occupancy n={n} outside 1..{ledger.capacity}")
    if not ledger.riders:
        return 0.0
    return ledger.occupancy_histogram()[n] / len(ledger.riders)


def _mean(xs):
    xs = list(xs)
    return sum(xs) / len(xs) if xs else 0.0


def summarize(ledger: MetricsLedger) -> "OrderedDict[str, float]":
    served = ledger.served
    hours = ledger.total_seconds / 3600.0
    profits = [driver_profit(d, ledger.p_taxi, ledger.money_per_cost) for d in ledger.drivers.values()]
    out = OrderedDict()
    out["total_requests"] = len(ledger.riders)
    out["served_requests"] = len(served)
    out["expired_requests"] = sum(1 for r in ledger.riders.values() if r.expired)
    out["zero_demand"] = int(ledger.zero_demand)
    out["serving_rate"] = serving_rate(ledger)
    out["avg_calling_time_min"] = _mean(r.calling_minutes for r in served)
    out["avg_extra_trip_time_min"] = _mean(r.extra_minutes for r in served)
    out["avg_fare"] = _mean(r.fare for r in served)
    out["avg_savings"] = _mean(r.base_fare - r.fare for r in served)
    out["avg_driver_profit"] = _mean(profits)
    out["avg_driver_profit_per_hour"] = _mean(profits) / hours if hours > 0 else 0.0
    out["platform_revenue"] = platform_revenue(ledger)
    out["taxi_utilization"] = taxi_utilization(ledger) if ledger.total_seconds > 0 else 0.0
    for n in range(1, ledger.capacity + 1):
        out[f"poolability_{n}"] = poolability(ledger, n)
    out["calling_time_quantum_min"] = ledger.cycle_seconds / 60.0
    return out


def write_summary(summary, path) -> None:
    with open(path, "w") as fh:
        fh.write("metric_name,value\n")
        for k, v in summary.items():
            fh.write(f"{k},{v!r}\n")
