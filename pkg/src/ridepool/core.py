"""Shared domain vocabulary: zones, clock, trip requests, taxis, configuration."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np


class ValidationError(ValueError):
    """Raised when user-supplied inputs (config, map, trips) are invalid."""


class InvariantError(RuntimeError):
    """Raised when the simulation reaches an inconsistent state (a bug)."""


@dataclass
class SimClock:
    cycle_length: int = 180
    start_time: int = 0
    end_time: int = 0
    cycle_index: int = 0

    @property
    def now(self) -> int:
        return self.start_time + self.cycle_index * self.cycle_length

    def advance(self) -> None:
        self.cycle_index += 1


@dataclass
class Zone:
    zone_id: int
    centroid: Tuple[float, float]
    adjacent_ids: set = field(default_factory=set)


class CityMap:
    """Zone set with symmetric adjacency and planar centroids.

    Hop distances are computed lazily by BFS from each zone and cached.
    """

    def __init__(self, zones: Iterable[Zone]):
        self.zones: Dict[int, Zone] = {}
        for z in zones:
            if z.zone_id in self.zones:
                raise ValidationError(f"duplicate zone id {z.zone_id}")
            self.zones[z.zone_id] = z
        self.zone_ids: List[int] = sorted(self.zones)
        self._index = {z: i for i, z in enumerate(self.zone_ids)}
        self._hops: Optional[np.ndarray] = None
        self._nbhd: Dict[int, List[int]] = {}

    @classmethod
    def from_edges(cls, centroids: Dict[int, Tuple[float, float]], edges: Iterable[Tuple[int, int]]) -> "CityMap":
        zones = {zid: Zone(zid, (float(x), float(y))) for zid, (x, y) in centroids.items()}
        for a, b in edges:
            if a not in zones or b not in zones:
                raise ValidationError(f"edge ({a},{b}) references an unknown zone")
            if a == b:
                continue
            zones[a].adjacent_ids.add(b)
            zones[b].adjacent_ids.add(a)
        return cls(zones.values())

    @classmethod
    def grid(cls, rows: int, cols: int) -> "CityMap":
        """4-connected rows x cols grid; zone id = row * cols + col, centroid = (col, row)."""
        centroids = {r * cols + c: (float(c), float(r)) for r in range(rows) for c in range(cols)}
        edges = []
        for r in range(rows):
            for c in range(cols):
                z = r * cols + c
                if c + 1 < cols:
                    edges.append((z, z + 1))
                if r + 1 < rows:
                    edges.append((z, z + cols))
        return cls.from_edges(centroids, edges)

    def __len__(self) -> int:
        return len(self.zones)

    def __contains__(self, zone_id) -> bool:
        return zone_id in self.zones

    def index(self, zone_id: int) -> int:
        return self._index[zone_id]

    def centroid(self, zone_id: int) -> Tuple[float, float]:
        try:
            return self.zones[zone_id].centroid
        except KeyError:
            raise KeyError(f"unknown zone id {zone_id}") from None

    def neighbors(self, zone_id: int) -> List[int]:
        return sorted(self.zones[zone_id].adjacent_ids)

    def neighborhood(self, zone_id: int) -> List[int]:
        """O(z): the zone itself plus its adjacent zones, ascending by id."""
        nb = self._nbhd.get(zone_id)
        if nb is None:
            nb = sorted(self.zones[zone_id].adjacent_ids | {zone_id})
            self._nbhd[zone_id] = nb
        return nb

    def bfs_hops(self, source: int) -> Dict[int, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            q = queue.popleft()
            for n in self.neighbors(q):
                if n not in dist:
                    dist[n] = dist[q] + 1
                    queue.append(n)
        return dist

    @property
    def hops(self) -> np.ndarray:
        """All-pairs hop-count matrix indexed by ``index(zone_id)``; -1 where unreachable."""
        if self._hops is None:
            n = len(self.zone_ids)
            h = np.full((n, n), -1, dtype=np.int64)
            for zid in self.zone_ids:
                i = self._index[zid]
                for other, d in self.bfs_hops(zid).items():
                    h[i, self._index[other]] = d
            self._hops = h
        return self._hops

    def hop_distance(self, a: int, b: int) -> int:
        d = int(self.hops[self._index[a], self._index[b]])
        if d < 0:
            raise ValidationError(f"zone {b} unreachable from zone {a}")
        return d

    def next_hop(self, current: int, target: int) -> int:
        """First zone on a shortest path from current to target (lowest id on ties)."""
        if current == target:
            return current
        d = self.hop_distance(current, target)
        h = self.hops
        t = self._index[target]
        for n in self.neighbors(current):
            if h[self._index[n], t] == d - 1:
                return n
        raise InvariantError(f"no shortest-path step from {current} to {target}")


def validate_city_map(city: CityMap) -> List[str]:
    """Return a list of violations; an empty list means the map is usable."""
    problems = []
    for zid in city.zone_ids:
        zone = city.zones[zid]
        if zone.centroid is None or len(zone.centroid) != 2 or any(
            c is None or not np.isfinite(c) for c in zone.centroid
        ):
            problems.append(f"missing centroid: zone {zid}")
        for n in sorted(zone.adjacent_ids):
            if n == zid:
                problems.append(f"self loop: zone {zid}")
            elif n not in city.zones:
                problems.append(f"unknown neighbor: zone {zid} -> {n}")
            elif zid not in city.zones[n].adjacent_ids:
                problems.append(f"asymmetric adjacency: {zid} -> {n}")
    if city.zone_ids:
        # undirected reachability so asymmetric edges are not double-reported
        seen = {city.zone_ids[0]}
        stack = [city.zone_ids[0]]
        while stack:
            q = stack.pop()
            linked = set(city.zones[q].adjacent_ids)
            linked |= {z for z in city.zone_ids if q in city.zones[z].adjacent_ids}
            for n in linked:
                if n in city.zones and n not in seen:
                    seen.add(n)
                    stack.append(n)
        if len(seen) != len(city.zone_ids):
            missing = sorted(set(city.zone_ids) - seen)
            problems.append(f"disconnected graph: zones {missing} unreachable")
    return problems


class RequestStatus(str, Enum):
    PENDING = "pending"
    POOLED = "pooled"
    MATCHED = "matched"
    ON_BOARD = "on_board"
    DELIVERED = "delivered"
    EXPIRED = "expired"


# pooled -> pending is the end-of-cycle dissolve of unmatched clusters
_ALLOWED = {
    RequestStatus.PENDING: {RequestStatus.POOLED, RequestStatus.EXPIRED},
    RequestStatus.POOLED: {RequestStatus.MATCHED, RequestStatus.PENDING, RequestStatus.EXPIRED},
    RequestStatus.MATCHED: {RequestStatus.ON_BOARD},
    RequestStatus.ON_BOARD: {RequestStatus.DELIVERED},
    RequestStatus.DELIVERED: set(),
    RequestStatus.EXPIRED: set(),
}


@dataclass
class TripRequest:
    t: int
    id: int
    o: int
    d: int
    p: int = 1200
    k: int = 1
    F: float = 0.0
    status: RequestStatus = RequestStatus.PENDING
    matched_at: Optional[int] = None
    picked_up_at: Optional[int] = None
    delivered_at: Optional[int] = None

    def transition(self, new: RequestStatus) -> None:
        if new not in _ALLOWED[self.status]:
            raise InvariantError(f"request {self.id}: illegal transition {self.status.value} -> {new.value}")
        self.status = new

    def is_expired_at(self, now: int) -> bool:
        return now - self.t > self.p


def trip_direction(req: TripRequest, city: CityMap) -> Tuple[float, float]:
    ox, oy = city.centroid(req.o)
    dx, dy = city.centroid(req.d)
    return (dx - ox, dy - oy)


class Action(str, Enum):
    PICKUP = "pickup"
    DROPOFF = "dropoff"


@dataclass
class TaxiState:
    id: int
    l: int
    capacity: int = 4
    t: int = 0
    ca: int = -1
    s: List[Tuple[int, Action, int]] = field(default_factory=list)
    odometer_cost: float = 0.0
    busy_cycles: int = 0
    relocation_target: Optional[int] = None

    def __post_init__(self):
        if self.ca < 0:
            self.ca = self.capacity

    @property
    def idle(self) -> bool:
        return not self.s


@dataclass(frozen=True)
class MatchResponse:
    request_id: int
    taxi_id: int
    issued_at: int


@dataclass
class ScenarioConfig:
    """Scenario parameters. Durations are in minutes as configured; see *_seconds helpers."""

    cycle_minutes: float = 3.0
    p_taxi: float = 0.7
    money_per_cost: float = 2.0
    capacity: int = 4
    patience_minutes: float = 20.0
    fare_lambda: float = 0.2
    move_threshold: float = 0.1
    alpha: float = 0.5
    gamma: float = 0.8
    theta_ctr: float = 30.0
    fleet_size: int = 100
    cost_adjacent: float = 1.0
    cost_stay: float = 0.5
    base_fare: float = 3.25
    per_hop_fare: float = 4.5
    seed: int = 0
    window_start: str = ""
    window_end: str = ""

    @property
    def cycle_seconds(self) -> int:
        return int(round(self.cycle_minutes * 60))

    @property
    def patience_seconds(self) -> int:
        return int(round(self.patience_minutes * 60))

    def validate(self) -> None:
        def bad(key, why):
            raise ValidationError(f"invalid config key '{key}': {why}")

        if self.cycle_seconds <= 0:
            bad("cycle_minutes", "must be positive")
        if not 0 <= self.p_taxi <= 1:
            bad("p_taxi", "must lie in [0, 1]")
        if self.money_per_cost < 0:
            bad("money_per_cost", "must be >= 0")
        if self.capacity < 1:
            bad("capacity", "must be >= 1")
        if self.patience_minutes < 0:
            bad("patience_minutes", "must be >= 0")
        if self.fare_lambda < 0:
            bad("fare_lambda", "must be >= 0")
        if self.move_threshold < 0:
            bad("move_threshold", "must be >= 0")
        if not 0 <= self.alpha <= 1:
            bad("alpha", "must lie in [0, 1]")
        if not 0 <= self.gamma <= 1:
            bad("gamma", "must lie in [0, 1]")
        if not theta_divides_360(self.theta_ctr):
            bad("theta_ctr", f"{self.theta_ctr} does not evenly divide 360")
        if self.fleet_size < 0:
            bad("fleet_size", "must be >= 0")
        if self.cost_adjacent < 0 or self.cost_stay < 0:
            bad("cost_adjacent" if self.cost_adjacent < 0 else "cost_stay", "must be >= 0")

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]


def theta_divides_360(theta: float) -> bool:
    if not theta > 0 or theta > 360:
        return False
    n = 360.0 / theta
    return abs(n - round(n)) < 1e-9
