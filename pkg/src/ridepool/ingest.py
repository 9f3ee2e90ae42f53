"""City-map and trip-file readers/writers."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import datetime, time, timedelta
from typing import Dict, List, Optional, Tuple

from .core import CityMap, TripRequest, ValidationError, validate_city_map

log = logging.getLogger(__name__)

ZONE_HEADER = ["zone_id", "centroid_x", "centroid_y"]
EDGE_HEADER = ["zone_id_a", "zone_id_b"]
TRIP_COLUMNS = ("start_timestamp", "pickup_zone", "dropoff_zone", "fare")
TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"


def load_city_map(path, validate: bool = True) -> CityMap:
    """Read a two-section map file: zone rows, then (undirected) edge rows."""
    centroids: Dict[int, Tuple[float, float]] = {}
    edges: List[Tuple[int, int]] = []
    section = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [c.strip() for c in row]
            if not row or not any(row) or row[0].startswith("#"):
                continue
            if row == ZONE_HEADER:
                section = "zones"
                continue
            if row == EDGE_HEADER:
                section = "edges"
                continue
            try:
                if section == "zones":
                    zid, x, y = row
                    centroids[int(zid)] = (float(x), float(y))
                elif section == "edges":
                    a, b = row
                    edges.append((int(a), int(b)))
                else:
                    raise ValidationError(f"{path}:{lineno}: data before a section header")
            except ValueError as exc:
                if isinstance(exc, ValidationError):
                    raise
                raise ValidationError(f"{path}:{lineno}: malformed row {row}") from None
    city = CityMap.from_edges(centroids, edges)
    if validate:
        problems = validate_city_map(city)
        if problems:
            raise ValidationError(f"{path}: " + "; ".join(problems))
    return city


def save_city_map(city: CityMap, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(ZONE_HEADER) + "\n")
        for zid in city.zone_ids:
            x, y = city.centroid(zid)
            fh.write(f"{zid},{x!r},{y!r}\n")
        fh.write(",".join(EDGE_HEADER) + "\n")
        for zid in city.zone_ids:
            for n in city.neighbors(zid):
                if zid < n:
                    fh.write(f"{zid},{n}\n")


@dataclass(frozen=True)
class TimeWindow:
    """Time-of-day window [start, end]; request times are seconds after ``start`` on their own date."""

    start: time = time(0, 0, 0)
    end: time = time(23, 59, 59)

    @classmethod
    def parse(cls, start: str, end: str) -> "TimeWindow":
        try:
            return cls(time.fromisoformat(start), time.fromisoformat(end))
        except ValueError:
            raise ValidationError(f"bad window {start!r}-{end!r}; expected HH:MM[:SS]") from None

    @property
    def seconds(self) -> int:
        s = self.start.hour * 3600 + self.start.minute * 60 + self.start.second
        e = self.end.hour * 3600 + self.end.minute * 60 + self.end.second
        return e - s + 1

    def offset(self, ts: datetime) -> Optional[int]:
        begin = datetime.combine(ts.date(), self.start)
        off = int((ts - begin).total_seconds())
        return off if 0 <= off < self.seconds else None


@dataclass
class TripRecord:
    start_timestamp: datetime
    pickup_zone_id: int
    dropoff_zone_id: int
    fare: Optional[float]


@dataclass
class SkipReport:
    out_of_window: int = 0
    unknown_zone: int = 0
    kept: int = 0
    dates: set = field(default_factory=set)

    @property
    def skipped(self) -> int:
        return self.out_of_window + self.unknown_zone

    def line(self, path) -> str:
        return (f"{path}: kept {self.kept}, skipped {self.skipped} "
                f"(out_of_window={self.out_of_window}, unknown_zone={self.unknown_zone})")


def parse_column_map(text: Optional[str]) -> Dict[str, str]:
    """``name=Source Column,...`` pairs; ``timestamp_format`` sets the strptime pattern."""
    mapping: Dict[str, str] = {}
    if not text:
        return mapping
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ValidationError(f"bad column-map entry {part!r}; expected name=column")
        k, v = part.split("=", 1)
        k = k.strip()
        if k not in TRIP_COLUMNS and k != "timestamp_format":
            raise ValidationError(f"unknown column-map key {k!r}")
        mapping[k] = v.strip()
    return mapping


def _fare_model(city: CityMap, o: int, d: int, base_fare: float, per_hop_fare: float) -> float:
    return base_fare + per_hop_fare * city.hop_distance(o, d)


def read_trip_records(path, column_map: Optional[Dict[str, str]] = None) -> List[Tuple[int, TripRecord]]:
    column_map = dict(column_map or {})
    fmt = column_map.pop("timestamp_format", TIMESTAMP_FORMAT)
    cols = {c: column_map.get(c, c) for c in TRIP_COLUMNS}
    records = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read trip file {path}: {exc}") from None
    with fh:
        reader = csv.DictReader(fh)
        missing = [src for src in cols.values() if src not in (reader.fieldnames or [])]
        if missing:
            raise ValidationError(f"{path}: missing columns {missing}")
        for rowno, row in enumerate(reader, start=2):
            try:
                ts = datetime.strptime(row[cols["start_timestamp"]].strip(), fmt)
                o = int(float(row[cols["pickup_zone"]]))
                d = int(float(row[cols["dropoff_zone"]]))
                fare_text = (row[cols["fare"]] or "").strip().replace("$", "")
                fare = float(fare_text) if fare_text else None
            except (TypeError, ValueError):
                raise ValidationError(f"{path}: malformed row {rowno}") from None
            records.append((rowno, TripRecord(ts, o, d, fare)))
    return records


def load_trips(path, city: CityMap, window: TimeWindow = TimeWindow(), *,
               column_map: Optional[Dict[str, str]] = None, patience: int = 1200, k: int = 1,
               base_fare: float = 3.25, per_hop_fare: float = 4.5,
               report: Optional[SkipReport] = None) -> List[TripRequest]:
    """Requests sorted by time (file order kept on ties); out-of-window and unknown-zone rows are skipped."""
    report = report if report is not None else SkipReport()
    kept = []
    for rowno, rec in read_trip_records(path, column_map):
        if rec.pickup_zone_id not in city or rec.dropoff_zone_id not in city:
            report.unknown_zone += 1
            continue
        off = window.offset(rec.start_timestamp)
        if off is None:
            report.out_of_window += 1
            continue
        F = rec.fare if rec.fare is not None else _fare_model(
            city, rec.pickup_zone_id, rec.dropoff_zone_id, base_fare, per_hop_fare)
        report.dates.add(rec.start_timestamp.date())
        kept.append((off, rowno, rec.pickup_zone_id, rec.dropoff_zone_id, F))
    kept.sort(key=lambda x: (x[0], x[1]))
    report.kept = len(kept)
    return [TripRequest(t=off, id=i, o=o, d=d, p=patience, k=k, F=F)
            for i, (off, _, o, d, F) in enumerate(kept)]


def write_trips(requests, path, day: datetime = datetime(2019, 1, 1), window: TimeWindow = TimeWindow()) -> None:
    """Write requests in the canonical trip-file format, offsets anchored at ``day`` + window start."""
    begin = datetime.combine(day.date(), window.start)
    with open(path, "w") as fh:
        fh.write(",".join(TRIP_COLUMNS) + "\n")
        for r in requests:
            ts = begin + timedelta(seconds=r.t)
            fh.write(f"{ts.strftime(TIMESTAMP_FORMAT)},{r.o},{r.d},{r.F!r}\n")
