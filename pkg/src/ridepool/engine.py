"""Cycle-driven ridesharing simulation.

Timeline of cycle ``c`` (decision time ``now = c * cycle_seconds``):

1. release requests with ``t < now`` (those that arrived during the previous interval)
2. expire requests whose age exceeds their patience
3. pool pending requests per origin zone
4. match clusters to idle taxis (ARDL or SMW), zones in ascending id order
5. move every taxi: act at its current zone, hop once toward its next stop
   (or relocation target), then act at the reached zone at ``now + cycle_seconds``
6. greedy idle movement decisions for the taxis idle after step 5

Every state change is emitted as an event and folded into the metrics ledger.
"""

from __future__ import annotations

import dataclasses
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .core import (
    Action,
    CityMap,
    InvariantError,
    RequestStatus,
    ScenarioConfig,
    TaxiState,
    TripRequest,
    ValidationError,
    validate_city_map,
)
from .demand import ValueTable
from .matching import SupplySnapshot, ardl_match
from .metrics import LedgerBuilder, MetricsLedger, summarize
from .pooling import pool_requests, singleton_table
from .relocation import find_base_zone, gim_decide, propagate
from .smw import SmwQueues, smw_match

PIPELINES = ("SMW", "SMW+CP", "ARDL+CP", "ARDL+CP+GIM")


def canonical_pipeline(name: str) -> str:
    key = name.strip().upper().replace(" ", "")
    for p in PIPELINES:
        if p == key:
            return p
    raise ValidationError(f"unknown pipeline {name!r}; choose one of {', '.join(PIPELINES)}")


@dataclass
class PipelineConfig:
    pipeline: str
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    smw_weights: Optional[Dict[int, float]] = None

    def __post_init__(self):
        self.pipeline = canonical_pipeline(self.pipeline)

    @property
    def uses_cp(self) -> bool:
        return "CP" in self.pipeline

    @property
    def uses_ardl(self) -> bool:
        return self.pipeline.startswith("ARDL")

    @property
    def uses_gim(self) -> bool:
        return self.pipeline.endswith("GIM")

    def validate(self) -> None:
        self.scenario.validate()
        if self.uses_gim and not self.uses_ardl:
            raise ValidationError("GIM requires the ARDL value table")


def plan_route(taxi: TaxiState, members: Sequence[TripRequest], city: CityMap):
    """Pick up the whole cluster at its shared origin, then drop off nearest-first by hop count."""
    if not taxi.idle:
        raise InvariantError(f"taxi {taxi.id} already has a route")
    if sum(r.k for r in members) > taxi.capacity:
        raise InvariantError(f"cluster of {len(members)} exceeds capacity {taxi.capacity}")
    origin = members[0].o
    if any(r.o != origin for r in members):
        raise InvariantError("cluster members do not share an origin zone")
    route = [(origin, Action.PICKUP, r.id) for r in members]
    by_dest: Dict[int, List[int]] = defaultdict(list)
    for r in members:
        by_dest[r.d].append(r.id)
    cur = origin
    while by_dest:
        nxt = min(by_dest, key=lambda z: (city.hop_distance(cur, z), z))
        route.extend((nxt, Action.DROPOFF, rid) for rid in by_dest.pop(nxt))
        cur = nxt
    return route


@dataclass
class SimResult:
    ledger: MetricsLedger
    events: list
    timings: Dict[str, List[float]]
    cycles: int

    @property
    def summary(self):
        return summarize(self.ledger)


class Simulation:
    def __init__(self, config: PipelineConfig, trips: Sequence[TripRequest], city: CityMap,
                 value_table: Optional[ValueTable] = None, horizon: Optional[int] = None,
                 initial_zones: Optional[Sequence[int]] = None, check_invariants: bool = True):
        config.validate()
        problems = validate_city_map(city)
        if problems:
            raise ValidationError("; ".join(problems))
        if config.uses_ardl and value_table is None:
            raise ValidationError(f"pipeline {config.pipeline} needs a value table")
        sc = config.scenario
        self.config = config
        self.sc = sc
        self.city = city
        self.values = value_table
        self.dt = sc.cycle_seconds
        self.check = check_invariants

        self.trips = sorted((dataclasses.replace(r) for r in trips), key=lambda r: r.t)
        for r in self.trips:
            if r.o not in city or r.d not in city:
                raise ValidationError(f"request {r.id} references a zone missing from the map")
            if r.k > sc.capacity:
                raise ValidationError(f"request {r.id} has {r.k} riders, above capacity {sc.capacity}")
        self.requests = {r.id: r for r in self.trips}
        if len(self.requests) != len(self.trips):
            raise ValidationError("duplicate request ids")
        if horizon is None:
            horizon = self.trips[-1].t + 1 if self.trips else 0
            if value_table is not None:
                horizon = max(horizon, value_table.T * self.dt)
        self.end_time = horizon

        self.rng = np.random.default_rng(sc.seed)
        if initial_zones is None:
            initial_zones = self.rng.choice(np.array(city.zone_ids), size=sc.fleet_size).tolist()
        elif len(initial_zones) != sc.fleet_size:
            raise ValidationError("initial_zones length must equal fleet_size")
        self.fleet = [TaxiState(i, int(z), sc.capacity) for i, z in enumerate(initial_zones)]

        self.cycle = 0
        self._next = 0
        self.pending: List[TripRequest] = []
        self.n_delivered = 0
        self.n_expired = 0
        self.leftover: Dict[int, int] = {}
        self.events: list = []
        self.builder = LedgerBuilder()
        self.timings: Dict[str, List[float]] = {"CP": [], "ARDL": [], "SMW": [], "GIM": []}
        self._emit((-1, "config", {
            "pipeline": config.pipeline,
            "cycle_seconds": self.dt,
            "fare_lambda": repr(sc.fare_lambda),
            "p_taxi": repr(sc.p_taxi),
            "money_per_cost": repr(sc.money_per_cost),
            "capacity": sc.capacity,
            "fleet_size": sc.fleet_size,
            "theta_ctr": repr(sc.theta_ctr),
            "seed": sc.seed,
            "calling_time": "quantized_to_cycle_boundaries",
        }))

    # -- plumbing -------------------------------------------------------

    def _emit(self, event) -> None:
        self.events.append(event)
        self.builder.consume(event)

    @property
    def now(self) -> int:
        return self.cycle * self.dt

    def done(self) -> bool:
        return (self._next >= len(self.trips) and self.now >= self.end_time
                and not self.pending and all(t.idle for t in self.fleet))

    def value_row(self) -> Dict[int, float]:
        return self.values.row(self.cycle) if self.values is not None else {}

    # -- one cycle --------------------------------------------------------

    def step(self) -> None:
        c, now = self.cycle, self.now
        self._emit((c, "cycle", now))
        self._release(now)
        self._expire(now)
        tables = self._pool()
        self._match(tables, now)
        self._move(now)
        if self.config.uses_gim:
            self._relocate()
        if self.check:
            self.check_invariants()
        self.cycle += 1

    def _release(self, now: int) -> None:
        while self._next < len(self.trips) and self.trips[self._next].t < now:
            r = self.trips[self._next]
            self._next += 1
            self.pending.append(r)
            hops = self.city.hop_distance(r.o, r.d)
            self._emit((self.cycle, "release", r.id, r.t, r.o, r.d, r.k, r.p, float(r.F), hops))

    def _expire(self, now: int) -> None:
        keep = []
        for r in self.pending:
            if r.is_expired_at(now):
                r.transition(RequestStatus.EXPIRED)
                self.n_expired += 1
                self._emit((self.cycle, "expire", r.id, now))
            else:
                keep.append(r)
        self.pending = keep

    def _pool(self):
        by_zone: Dict[int, List[TripRequest]] = defaultdict(list)
        for r in self.pending:
            by_zone[r.o].append(r)
        t0 = time.perf_counter()
        tables = {}
        for z in sorted(by_zone):
            if self.config.uses_cp:
                tables[z] = pool_requests(by_zone[z], self.sc.theta_ctr, self.sc.capacity, self.city, z)
            else:
                tables[z] = singleton_table(by_zone[z], z, self.sc.capacity)
        if self.config.uses_cp:
            self.timings["CP"].append(time.perf_counter() - t0)
        for z, table in tables.items():
            for cl in table.clusters():
                for r in cl.members:
                    r.transition(RequestStatus.POOLED)
                self._emit((self.cycle, "pool", z, cl.bucket_index, cl.cluster_id, cl.member_ids))
        return tables

    def _match(self, tables, now: int) -> None:
        supply = SupplySnapshot.from_fleet(self.fleet)
        t0 = time.perf_counter()
        results = []
        if self.config.uses_ardl:
            row = self.value_row()
            for z in sorted(tables):
                results.append(ardl_match(tables[z], supply, row, self.city))
            self.timings["ARDL"].append(time.perf_counter() - t0)
        else:
            queues = SmwQueues(supply, self.config.smw_weights)
            for z in sorted(tables):
                results.append(smw_match(tables[z], queues, self.city))
            self.timings["SMW"].append(time.perf_counter() - t0)

        for ml in results:
            for m in ml.pairs:
                taxi = self.fleet[m.taxi_id]
                members = m.cluster.members
                for r in members:
                    r.transition(RequestStatus.MATCHED)
                    r.matched_at = now
                taxi.s = plan_route(taxi, members, self.city)
                taxi.relocation_target = None
                taxi.t = now
                self._emit((self.cycle, "match", ml.zone_id, taxi.id, m.supplier_zone, now,
                            m.cluster.member_ids, m.scores))

        # unmatched clusters dissolve; their riders re-pool next cycle
        still = []
        leftover: Dict[int, int] = defaultdict(int)
        for r in self.pending:
            if r.status is RequestStatus.POOLED:
                r.transition(RequestStatus.PENDING)
                still.append(r)
                leftover[r.o] += 1
        self.pending = still
        self.leftover = dict(leftover)

    def _act(self, taxi: TaxiState, at: int) -> None:
        while taxi.s and taxi.s[0][0] == taxi.l:
            _, action, rid = taxi.s.pop(0)
            r = self.requests[rid]
            if action is Action.PICKUP:
                r.transition(RequestStatus.ON_BOARD)
                r.picked_up_at = at
                taxi.ca -= r.k
                self._emit((self.cycle, "pickup", taxi.id, rid, at))
            else:
                r.transition(RequestStatus.DELIVERED)
                r.delivered_at = at
                taxi.ca += r.k
                self.n_delivered += 1
                self._emit((self.cycle, "dropoff", taxi.id, rid, at))
        taxi.t = at

    def _move(self, now: int) -> None:
        arrive = now + self.dt
        for taxi in self.fleet:
            busy = 0 if taxi.idle else 1
            src = taxi.l
            self._act(taxi, now)
            if taxi.s:
                taxi.l = self.city.next_hop(src, taxi.s[0][0])
            elif taxi.relocation_target is not None:
                taxi.l = taxi.relocation_target
            taxi.relocation_target = None
            cost = self.sc.cost_adjacent if taxi.l != src else self.sc.cost_stay
            taxi.odometer_cost += cost
            taxi.busy_cycles += busy
            if taxi.l != src:
                self._act(taxi, arrive)
            self._emit((self.cycle, "move", taxi.id, src, taxi.l, float(cost), busy))

    def _relocate(self) -> None:
        t0 = time.perf_counter()
        base = find_base_zone(self.leftover, self.city.zone_ids)
        vprime = propagate(self.value_row(), base, self.sc.alpha, self.city)
        decisions = []
        for taxi in self.fleet:
            if taxi.idle:
                target = gim_decide(taxi, vprime, self.sc.move_threshold, self.city)
                if target != taxi.l:
                    taxi.relocation_target = target
                    decisions.append((taxi.id, taxi.l, target, vprime[target] - vprime[taxi.l]))
        self.timings["GIM"].append(time.perf_counter() - t0)
        for tid, src, dst, delta in decisions:
            self._emit((self.cycle, "relocate", tid, src, dst, float(delta)))

    # -- checks -----------------------------------------------------------

    def check_invariants(self) -> None:
        cap = self.sc.capacity
        on_board = 0
        in_routes = 0
        for taxi in self.fleet:
            if not 0 <= taxi.ca <= cap:
                raise InvariantError(f"taxi {taxi.id} capacity {taxi.ca} outside [0, {cap}]")
            if taxi.idle and taxi.ca != cap:
                raise InvariantError(f"idle taxi {taxi.id} still carries riders")
            riders = {rid for _, _, rid in taxi.s}
            in_routes += len(riders)
            for rid in riders:
                if self.requests[rid].status is RequestStatus.ON_BOARD:
                    on_board += self.requests[rid].k
            if cap - taxi.ca != sum(self.requests[rid].k for rid in riders
                                    if self.requests[rid].status is RequestStatus.ON_BOARD):
                raise InvariantError(f"taxi {taxi.id} capacity disagrees with riders on board")
        released = self._next
        active = len(self.pending) + in_routes
        if active + self.n_delivered + self.n_expired != released:
            raise InvariantError(
                f"conservation broken: {active} active + {self.n_delivered} delivered + "
                f"{self.n_expired} expired != {released} released")

    # -- driver -----------------------------------------------------------

    def run(self) -> SimResult:
        while not self.done():
            self.step()
        self._emit((self.cycle, "end", self.now))
        return SimResult(self.builder.ledger, self.events, self.timings, self.cycle)


def run(config: PipelineConfig, trips, city: CityMap, value_table: Optional[ValueTable] = None,
        horizon: Optional[int] = None, **kwargs) -> SimResult:
    return Simulation(config, trips, city, value_table, horizon, **kwargs).run()
