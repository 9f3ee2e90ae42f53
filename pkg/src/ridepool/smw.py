"""Scaled MaxWeight baseline: assign from the neighborhood queue with the largest scaled length."""

from __future__ import annotations

from typing import Dict, Optional

from .core import CityMap
from .matching import Match, MatchList, SupplySnapshot
from .pooling import IndexTable


class SmwQueues:
    def __init__(self, supply: SupplySnapshot, weights: Optional[Dict[int, float]] = None):
        if weights and any(w <= 0 for w in weights.values()):
            raise ValueError("SMW weights must be positive")
        self.supply = supply
        self.weights = dict(weights or {})

    def weight(self, zone_id: int) -> float:
        return self.weights.get(zone_id, 1.0)

    def scaled(self, zone_id: int) -> float:
        return self.supply.count(zone_id) / self.weight(zone_id)


def smw_assign(zone_id: int, queues: SmwQueues, city: CityMap):
    """Pop a taxi for a request (or cluster) in ``zone_id``; None when O(z) is empty.

    Returns (taxi_id, supplier_zone, scores).
    """
    scores = {z: queues.scaled(z) for z in city.neighborhood(zone_id)}
    best = None
    for z in sorted(scores):
        if queues.supply.count(z) == 0:
            continue
        if best is None or scores[z] > scores[best]:
            best = z
    if best is None:
        return None
    return queues.supply.pop(best), best, scores


def smw_match(table: IndexTable, queues: SmwQueues, city: CityMap) -> MatchList:
    out = MatchList(table.zone_id)
    for cluster in table.clusters():
        got = smw_assign(table.zone_id, queues, city)
        if got is None:
            break
        taxi_id, supplier, scores = got
        out.pairs.append(Match(taxi_id, cluster, supplier, scores))
    return out
