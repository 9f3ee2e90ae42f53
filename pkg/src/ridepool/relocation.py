"""Demand propagation from the most-needy zone and greedy idle-taxi movement."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Optional

from .core import CityMap, InvariantError, TaxiState, ValidationError


@dataclass(frozen=True)
class PropagatedValues:
    values: Dict[int, float]
    base_zone: int
    alpha: float
    bfs_parent: Dict[int, Optional[int]]

    def __getitem__(self, zone_id: int) -> float:
        return self.values[zone_id]


def find_base_zone(leftover: Dict[int, int], zone_ids=None) -> int:
    """Zone with the most unserved riders; lowest id on ties (including all-zero)."""
    zones = sorted(zone_ids if zone_ids is not None else leftover)
    if not zones:
        raise ValueError("no zones to choose from")
    best = zones[0]
    for z in zones:
        if leftover.get(z, 0) > leftover.get(best, 0):
            best = z
    return best


def propagate(values: Dict[int, float], base_zone: int, alpha: float, city: CityMap) -> PropagatedValues:
    """BFS from ``base_zone``; each newly discovered zone adds alpha times its parent's V'.

    ``values`` maps zone id to V(t, z) at the current timestamp.  Neighbors are
    visited in ascending id order so the parent choice is reproducible.
    """
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    vp = {base_zone: values.get(base_zone, 0.0)}
    parent: Dict[int, Optional[int]] = {base_zone: None}
    queue = deque([base_zone])
    while queue:
        q = queue.popleft()
        for z in city.neighbors(q):
            if z not in vp:
                vp[z] = values.get(z, 0.0) + alpha * vp[q]
                parent[z] = q
                queue.append(z)
    if len(vp) != len(city):
        raise ValidationError("city map is disconnected; propagation cannot reach every zone")
    return PropagatedValues(vp, base_zone, alpha, parent)


def gim_decide(taxi: TaxiState, vprime: PropagatedValues, move_threshold: float, city: CityMap) -> int:
    if not taxi.idle:
        raise InvariantError(f"greedy idle movement asked about busy taxi {taxi.id}")
    here = taxi.l
    best = here
    for z in city.neighborhood(here):
        # a neighbor has to strictly beat the current best to count
        if vprime[z] > vprime[best]:
            best = z
    if best != here and vprime[best] - vprime[here] >= move_threshold:
        return best
    return here
