"""Adjacency ride-matching on supply-demand ratios."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from .core import CityMap
from .pooling import IndexTable, TupleCluster


class SupplySnapshot:
    """Idle taxis available for matching, grouped by zone.

    Each zone's ids are kept in a heap so the lowest taxi id pops first.
    """

    def __init__(self, by_zone: Dict[int, Iterable[int]] = None):
        self._heaps: Dict[int, List[int]] = {}
        seen = set()
        for z, ids in (by_zone or {}).items():
            heap = list(ids)
            dup = seen.intersection(heap)
            if dup or len(set(heap)) != len(heap):
                raise ValueError(f"taxi listed under more than one zone: {sorted(dup)}")
            seen.update(heap)
            heapq.heapify(heap)
            self._heaps[z] = heap

    @classmethod
    def from_fleet(cls, fleet) -> "SupplySnapshot":
        by_zone: Dict[int, List[int]] = {}
        for taxi in fleet:
            if taxi.idle:
                by_zone.setdefault(taxi.l, []).append(taxi.id)
        return cls(by_zone)

    def count(self, zone_id: int) -> int:
        return len(self._heaps.get(zone_id, ()))

    def ids(self, zone_id: int) -> List[int]:
        return sorted(self._heaps.get(zone_id, ()))

    def total(self) -> int:
        return sum(len(h) for h in self._heaps.values())

    def pop(self, zone_id: int) -> int:
        return heapq.heappop(self._heaps[zone_id])

    def zones(self) -> List[int]:
        return sorted(z for z, h in self._heaps.items() if h)


@dataclass
class Match:
    taxi_id: int
    cluster: TupleCluster
    supplier_zone: int
    scores: Dict[int, float] = field(default_factory=dict)


@dataclass
class MatchList:
    zone_id: int
    pairs: List[Match] = field(default_factory=list)

    def __len__(self):
        return len(self.pairs)


def sd_ratio(x: float, v: float) -> float:
    return x / (1.0 + v)


def argmax_zone(scores: Dict[int, float]) -> int:
    """Zone with the highest score; lowest zone id on ties."""
    best = None
    for z in sorted(scores):
        if best is None or scores[z] > scores[best]:
            best = z
    return best


def ardl_match(table: IndexTable, supply: SupplySnapshot, values: Dict[int, float],
               city: CityMap) -> MatchList:
    """Pair each cluster with a taxi from the neighborhood zone of maximal S-D ratio.

    ``values`` maps zone id to the learned value at the current timestamp.
    Processing of this zone stops at the first cluster whose best supplier
    zone has no taxis left.
    """
    z = table.zone_id
    out = MatchList(z)
    candidates = city.neighborhood(z)
    for cluster in table.clusters():
        scores = {k: sd_ratio(supply.count(k), values.get(k, 0.0)) for k in candidates}
        k = argmax_zone(scores)
        if supply.count(k) == 0:
            break
        out.pairs.append(Match(supply.pop(k), cluster, k, scores))
    return out
