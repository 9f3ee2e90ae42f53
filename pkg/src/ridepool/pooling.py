"""Correlated pooling: angle-bucketed, capacity-bounded request clusters per zone."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple

from .core import CityMap, TripRequest, ValidationError, theta_divides_360, trip_direction


def trip_angle(direction: Tuple[float, float]) -> float:
    """Counterclockwise angle from the +x axis in [0, 360); the zero vector maps to 0."""
    x, y = direction
    if x == 0 and y == 0:
        return 0.0
    a = math.degrees(math.atan2(y, x)) % 360.0
    # -tiny % 360 can round up to exactly 360.0
    return 0.0 if a >= 360.0 else a


def angle_between(a: Tuple[float, float], b: Tuple[float, float]) -> float:
    na = math.hypot(*a)
    nb = math.hypot(*b)
    cos = (a[0] * b[0] + a[1] * b[1]) / (na * nb)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


def is_correlated(dir_a, dir_b, theta_ctr: float, eps: float = 1e-9) -> bool:
    """True when the angle between the two trip directions is at most theta_ctr.

    A zero vector (same-zone trip) is correlated with anything.
    """
    if (dir_a[0] == 0 and dir_a[1] == 0) or (dir_b[0] == 0 and dir_b[1] == 0):
        return True
    return angle_between(dir_a, dir_b) <= theta_ctr + eps


@dataclass
class TupleCluster:
    cluster_id: int
    bucket_index: int
    members: List[TripRequest] = field(default_factory=list)
    seats: int = 0

    @property
    def member_ids(self) -> List[int]:
        return [r.id for r in self.members]

    def __len__(self):
        return len(self.members)


@dataclass
class IndexTable:
    zone_id: int
    theta_ctr: float
    capacity: int
    buckets: List[List[TupleCluster]]
    ops: int = 0

    def clusters(self) -> Iterator[TupleCluster]:
        """Non-empty clusters in bucket order, then creation order."""
        for bucket in self.buckets:
            for c in bucket:
                if c.members:
                    yield c


def bucket_count(theta_ctr: float) -> int:
    if not theta_divides_360(theta_ctr):
        raise ValidationError(f"theta_ctr={theta_ctr} does not evenly divide 360")
    return int(round(360.0 / theta_ctr))


def pool_requests(requests: Sequence[TripRequest], theta_ctr: float, capacity: int,
                  city: CityMap, zone_id: int = None) -> IndexTable:
    n_buckets = bucket_count(theta_ctr)
    if zone_id is None:
        zone_id = requests[0].o if requests else -1
    next_id = 0
    buckets: List[List[TupleCluster]] = []
    for b in range(n_buckets):
        buckets.append([TupleCluster(next_id, b)])
        next_id += 1
    table = IndexTable(zone_id, theta_ctr, capacity, buckets)

    for req in requests:
        if req.o != zone_id:
            raise ValidationError(f"request {req.id} originates in zone {req.o}, not {zone_id}")
        angle = trip_angle(trip_direction(req, city))
        b = min(int(angle / theta_ctr), n_buckets - 1)
        bucket = buckets[b]
        open_cluster = bucket[-1]
        if open_cluster.seats + req.k > capacity:
            open_cluster = TupleCluster(next_id, b)
            next_id += 1
            bucket.append(open_cluster)
        open_cluster.members.append(req)
        open_cluster.seats += req.k
        table.ops += 1
        if open_cluster.seats == capacity:
            bucket.append(TupleCluster(next_id, b))
            next_id += 1
    # drop the trailing empty clusters opened for new arrivals
    for bucket in buckets:
        while len(bucket) > 1 and not bucket[-1].members:
            bucket.pop()
    return table


def singleton_table(requests: Sequence[TripRequest], zone_id: int, capacity: int) -> IndexTable:
    """One cluster per request in arrival order, for pipelines without pooling."""
    clusters = []
    for i, req in enumerate(requests):
        c = TupleCluster(i, 0, [req], req.k)
        clusters.append(c)
    return IndexTable(zone_id, 360.0, capacity, [clusters], len(clusters))
