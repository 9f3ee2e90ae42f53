"""Per-(time, zone) demand values learned by backward value iteration.

Each state (t, z) only transitions to (t + 1, z), so the value function
reduces to a discounted running sum of request counts along each zone's
time chain, computed in one backward sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np


@dataclass
class ValueTable:
    zone_ids: Tuple[int, ...]
    gamma: float
    counts: np.ndarray
    values: np.ndarray
    updates: int = 0

    @property
    def T(self) -> int:
        return self.values.shape[0]

    def column(self, zone_id: int) -> int:
        try:
            return self._cols[zone_id]
        except AttributeError:
            self._cols = {z: i for i, z in enumerate(self.zone_ids)}
            return self.column(zone_id)
        except KeyError:
            raise KeyError(f"zone {zone_id} not in value table") from None

    def row(self, t: int) -> dict:
        """Values at timestamp t as {zone_id: value}; t is clamped to the table's range."""
        t = min(max(t, 0), self.T - 1)
        return dict(zip(self.zone_ids, self.values[t].tolist()))


def build_value_table(history: Iterable[Tuple[int, int]], gamma: float, T: int,
                      zones: Sequence[int], days: int = 1) -> ValueTable:
    """Count events per state and sweep t = T-1 .. 0.

    ``history`` holds (timestamp index, zone id) events.  With ``days`` > 1 the
    counts are averaged over that many days of history.
    """
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if days < 1:
        raise ValueError(f"days must be >= 1, got {days}")
    zone_ids = tuple(sorted(zones))
    col = {z: i for i, z in enumerate(zone_ids)}
    counts = np.zeros((T, len(zone_ids)))
    for n, (t, z) in enumerate(history):
        if not 0 <= t < T or z not in col:
            raise ValueError(f"history event #{n} (t={t}, zone={z}) is out of range")
        counts[t, col[z]] += 1
    if days > 1:
        counts /= days

    values = np.zeros_like(counts)
    updates = 0
    for t in range(T - 1, -1, -1):
        for j in range(len(zone_ids)):
            if t == T - 1:
                values[t, j] = counts[t, j]
            else:
                values[t, j] = counts[t, j] + gamma * values[t + 1, j]
            updates += 1
    table = ValueTable(zone_ids, float(gamma), counts, values, updates)
    return table


def lookup(table: ValueTable, t: int, z: int) -> float:
    if not 0 <= t < table.T:
        raise IndexError(f"timestamp {t} outside [0, {table.T})")
    return float(table.values[t, table.column(z)])


def save_value_table(table: ValueTable, path) -> None:
    with open(path, "w") as fh:
        fh.write("T,num_zones,gamma\n")
        fh.write(f"{table.T},{len(table.zone_ids)},{table.gamma!r}\n")
        for t in range(table.T):
            for j, z in enumerate(table.zone_ids):
                fh.write(f"{t},{z},{float(table.counts[t, j])!r},{float(table.values[t, j])!r}\n")


def load_value_table(path) -> ValueTable:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "T,num_zones,gamma":
        raise ValueError(f"{path}: missing 'T,num_zones,gamma' header")
    try:
        T, nz, gamma = lines[1].split(",")
        T, nz, gamma = int(T), int(nz), float(gamma)
    except (IndexError, ValueError):
        raise ValueError(f"{path}: malformed header values on line 2") from None
    rows = []
    for lineno, ln in enumerate(lines[2:], start=3):
        parts = ln.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}: malformed row on line {lineno}")
        rows.append((int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])))
    zone_ids = tuple(sorted({r[1] for r in rows}))
    if len(zone_ids) != nz or len(rows) != T * nz:
        raise ValueError(f"{path}: expected {T * nz} rows over {nz} zones, found {len(rows)}")
    col = {z: i for i, z in enumerate(zone_ids)}
    counts = np.zeros((T, nz))
    values = np.zeros((T, nz))
    for t, z, c, v in rows:
        counts[t, col[z]] = c
        values[t, col[z]] = v
    return ValueTable(zone_ids, gamma, counts, values)
