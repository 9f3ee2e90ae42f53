"""Line-per-event log: ``cycle,kind,field,...``.

Lists are joined with ``;`` and score maps are written as ``zone:value``
pairs, floats with ``repr`` so parsing round-trips bit-exactly.
"""

from __future__ import annotations

from typing import Iterable, Iterator, List, Tuple

Event = Tuple

# field kinds: i=int, f=float, s=str, L=list of int, D=dict int->float, K=key=value pairs
SCHEMA = {
    "config": "K",
    "cycle": "i",
    "release": "iiiiiifi",
    "expire": "ii",
    "pool": "iiiL",
    "match": "iiiiLD",
    "pickup": "iii",
    "dropoff": "iii",
    "move": "iiifi",
    "relocate": "iiif",
    "end": "i",
}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return ";".join(f"{k}:{float(v)!r}" for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return str(value)


def format_event(event: Event) -> str:
    cycle, kind, *rest = event
    if kind == "config":
        return ",".join([str(cycle), kind] + [f"{k}={v}" for k, v in rest[0].items()])
    return ",".join([str(cycle), kind] + [_fmt(v) for v in rest])


def parse_event(line: str) -> Event:
    parts = line.rstrip("\n").split(",")
    cycle, kind = int(parts[0]), parts[1]
    spec = SCHEMA.get(kind)
    if spec is None:
        raise ValueError(f"unknown event kind {kind!r}")
    raw = parts[2:]
    if spec == "K":
        return (cycle, kind, dict(p.split("=", 1) for p in raw))
    if len(raw) != len(spec):
        raise ValueError(f"event {kind!r} expects {len(spec)} fields, got {len(raw)}: {line!r}")
    out: List = [cycle, kind]
    for code, text in zip(spec, raw):
        if code == "i":
            out.append(int(text))
        elif code == "f":
            out.append(float(text))
        elif code == "L":
            out.append([int(x) for x in text.split(";")] if text else [])
        elif code == "D":
            d = {}
            if text:
                for item in text.split(";"):
                    k, v = item.split(":")
                    d[int(k)] = float(v)
            out.append(d)
        else:
            out.append(text)
    return tuple(out)


def write_events(events: Iterable[Event], path) -> None:
    with open(path, "w") as fh:
        for e in events:
            fh.write(format_event(e))
            fh.write("\n")


def read_events(path) -> Iterator[Event]:
    with open(path) as fh:
        for line in fh:
            if line.strip():
                yield parse_event(line)
