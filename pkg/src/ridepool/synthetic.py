"""Seeded synthetic demand on grid cities.

Arrivals per (cycle, zone) are Poisson with a configurable time-varying rate;
destinations are drawn from a per-origin distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Sequence, Tuple

import numpy as np

from .core import CityMap, TripRequest, ValidationError

if TYPE_CHECKING:
    from .demand import ValueTable


@dataclass
class SyntheticSpec:
    rows: int
    cols: int
    rates: np.ndarray          # (cycles, zones) expected arrivals per cycle
    destinations: np.ndarray   # (zones, zones) row-stochastic
    base_fare: float = 3.25
    per_hop_fare: float = 4.5
    seed: int = 0
    cycle_seconds: int = 180
    patience: int = 1200

    @property
    def cycles(self) -> int:
        return self.rates.shape[0]

    def validate(self) -> None:
        nz = self.rows * self.cols
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("grid dimensions must be positive")
        if self.rates.ndim != 2 or self.rates.shape[1] != nz:
            raise ValidationError(f"rates must have shape (cycles, {nz})")
        if np.any(self.rates < 0) or not np.all(np.isfinite(self.rates)):
            raise ValidationError("arrival rates must be finite and >= 0")
        if self.destinations.shape != (nz, nz):
            raise ValidationError(f"destinations must have shape ({nz}, {nz})")
        if np.any(self.destinations < 0):
            raise ValidationError("destination probabilities must be >= 0")
        if np.any(np.abs(self.destinations.sum(axis=1) - 1.0) > 1e-9):
            raise ValidationError("destination rows must sum to 1")
        if self.cycle_seconds <= 0:
            raise ValidationError("cycle_seconds must be positive")


def generate_synthetic(spec: SyntheticSpec) -> Tuple[List[TripRequest], CityMap]:
    spec.validate()
    city = CityMap.grid(spec.rows, spec.cols)
    rng = np.random.default_rng(spec.seed)
    counts = rng.poisson(spec.rates)
    cyc, zone = np.nonzero(counts)
    reps = counts[cyc, zone]
    cyc = np.repeat(cyc, reps)
    origin = np.repeat(zone, reps)
    n = len(origin)
    offsets = rng.integers(0, spec.cycle_seconds, size=n)
    t = cyc * spec.cycle_seconds + offsets
    dest = np.empty(n, dtype=np.int64)
    nz = spec.rows * spec.cols
    for z in range(nz):
        idx = np.flatnonzero(origin == z)
        if len(idx):
            dest[idx] = rng.choice(nz, size=len(idx), p=spec.destinations[z])
    order = np.argsort(t, kind="stable")
    hops = city.hops
    reqs = []
    for i, j in enumerate(order):
        o, d = int(origin[j]), int(dest[j])
        F = spec.base_fare + spec.per_hop_fare * int(hops[o, d])
        reqs.append(TripRequest(t=int(t[j]), id=i, o=o, d=d, p=spec.patience, k=1, F=F))
    return reqs, city


def _grid_xy(rows: int, cols: int) -> np.ndarray:
    return np.array([(c, r) for r in range(rows) for c in range(cols)], dtype=float)


def gaussian_rates(rows: int, cols: int, centers: Sequence[Tuple[float, float]], peak: float,
                   sigma: float, base: float = 0.0) -> np.ndarray:
    """Per-zone rate: base plus a Gaussian bump of height ``peak`` around each (x, y) center."""
    xy = _grid_xy(rows, cols)
    rate = np.full(len(xy), base, dtype=float)
    for cx, cy in centers:
        d2 = (xy[:, 0] - cx) ** 2 + (xy[:, 1] - cy) ** 2
        rate += peak * np.exp(-d2 / (2 * sigma ** 2))
    return rate


def destinations_toward(rows: int, cols: int, target: Tuple[float, float], sigma: float,
                        uniform_share: float = 0.0) -> np.ndarray:
    """Every origin sends trips near ``target``, mixed with a uniform share over all zones."""
    xy = _grid_xy(rows, cols)
    d2 = (xy[:, 0] - target[0]) ** 2 + (xy[:, 1] - target[1]) ** 2
    w = np.exp(-d2 / (2 * sigma ** 2))
    w /= w.sum()
    nz = len(xy)
    row = (1 - uniform_share) * w + uniform_share / nz
    row /= row.sum()
    return np.tile(row, (nz, 1))


def uniform_destinations(rows: int, cols: int) -> np.ndarray:
    nz = rows * cols
    return np.full((nz, nz), 1.0 / nz)


def commute_spec(seed: int = 0, rows: int = 10, cols: int = 10, cycles: int = 40,
                 peak: float = 6.0, origin: Tuple[float, float] = (3.0, 3.0),
                 target: Tuple[float, float] = (6.0, 6.0), sigma: float = 1.5) -> SyntheticSpec:
    """Heavy common-direction demand: riders around ``origin`` head toward ``target``."""
    rate = gaussian_rates(rows, cols, [origin], peak=peak, sigma=sigma, base=0.05)
    dest = destinations_toward(rows, cols, target, sigma=1.0, uniform_share=0.05)
    return SyntheticSpec(rows, cols, np.tile(rate, (cycles, 1)), dest, seed=seed)


def downtown_spec(seed: int = 0, rows: int = 8, cols: int = 8, cycles: int = 60, peak: float = 3.0,
                  sigma: float = 1.0, to_center: float = 0.5, base: float = 0.1) -> SyntheticSpec:
    """A sharp demand hotspot drifting across the city over the run.

    Half of all trips end near the city center and the rest anywhere, so
    deliveries keep stranding taxis away from where riders are calling.
    """
    rates = np.empty((cycles, rows * cols))
    a = np.array([2.0, 2.0])
    b = np.array([cols - 3.0, rows - 3.0])
    for c in range(cycles):
        frac = c / max(cycles - 1, 1)
        center = (1 - frac) * a + frac * b
        rates[c] = gaussian_rates(rows, cols, [tuple(center)], peak=peak, sigma=sigma, base=base)
    dest = destinations_toward(rows, cols, (cols / 2 - 0.5, rows / 2 - 0.5), sigma=1.0,
                               uniform_share=1 - to_center)
    return SyntheticSpec(rows, cols, rates, dest, seed=seed)


def history_events(requests: Sequence[TripRequest], cycle_seconds: int) -> List[Tuple[int, int]]:
    """(timestamp index, origin zone) pairs for value-table learning."""
    return [(r.t // cycle_seconds, r.o) for r in requests]


def chicago_scale_spec(seed: int = 0, rows: int = 7, cols: int = 11, cycles: int = 260,
                       total_requests: float = 40922.0) -> SyntheticSpec:
    """77-zone, 260-cycle scenario with about as many requests as the Chicago weekday export."""
    base = gaussian_rates(rows, cols, [(3.0, 3.0), (8.0, 2.0)], peak=1.0, sigma=2.0, base=0.1)
    shape = 1.0 + 0.5 * np.sin(np.linspace(0, 2 * np.pi, cycles))
    rates = np.outer(shape, base)
    rates *= total_requests / rates.sum()
    return SyntheticSpec(rows, cols, rates, uniform_destinations(rows, cols), seed=seed)


SCENARIOS = {
    "downtown": downtown_spec,
    "commute": commute_spec,
    "chicago-scale": chicago_scale_spec,
}

HISTORY_SEED_OFFSET = 10_000


@dataclass
class Scenario:
    trips: List[TripRequest]
    city: CityMap
    values: ValueTable
    horizon: int


def build_scenario(name: str, seed: int = 0, gamma: float = 0.8, **overrides) -> Scenario:
    """Generate a built-in scenario plus a value table learned from a separately seeded history day."""
    from .demand import build_value_table

    try:
        make = SCENARIOS[name]
    except KeyError:
        raise ValidationError(f"unknown scenario {name!r}; choose one of {', '.join(SCENARIOS)}") from None
    spec = make(seed=seed, **overrides)
    trips, city = generate_synthetic(spec)
    history, _ = generate_synthetic(make(seed=seed + HISTORY_SEED_OFFSET, **overrides))
    table = build_value_table(history_events(history, spec.cycle_seconds), gamma, spec.cycles, city.zone_ids)
    return Scenario(trips, city, table, spec.cycles * spec.cycle_seconds)
