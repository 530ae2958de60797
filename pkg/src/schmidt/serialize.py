"""JSONL streams for arrangements and packings, plus census CSV."""

from __future__ import annotations

import csv
import json
from typing import IO, Iterable

from .arrangement import Arrangement, ArrangementSpec, Window
from .errors import ValidationError
from .geom import CircleVec, NotUnitNorm, circle_make
from .packing import CensusRow, Packing
from .qfield import FieldCtx

FORMAT = 1
RECORD_FIELDS = ("delta", "D", "au", "av", "b", "c")
HEADER_FIELDS = ("format", "kind", "delta", "D", "window", "cMax", "generators", "count")


class ParseError(ValidationError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class InvariantViolation(ValidationError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _record(C: CircleVec, extra: dict | None = None, **more) -> dict:
    rec = dict(extra or {})
    rec.update(more)
    rec.update(C.to_json())
    return rec


def write_jsonl(obj: Arrangement | Packing, stream: IO[str]) -> None:
    """Header line then one record per circle in canonical key order."""
    if isinstance(obj, Packing):
        meta = obj.meta
        members = sorted(obj.members, key=lambda C: C.key)
        first = obj.seed
        header = {
            "kind": "packing",
            "window": obj.core.to_json() if obj.core else None,
            "cMax": meta.get("cMax"),
            "generators": meta.get("generators"),
            "seed": obj.seed.to_json(),
        }
    else:
        meta = obj.meta
        members = obj.circles
        first = members[0] if members else None
        spec = obj.spec
        header = {
            "kind": "arrangement",
            "window": spec.window.to_json() if spec else None,
            "cMax": spec.cMax if spec else None,
            "generators": meta.get("generators"),
        }
    if first is None:
        delta, D = meta.get("delta"), meta.get("D")
    else:
        delta, D = first.delta, first.D
    header.update({"format": FORMAT, "delta": delta, "D": D, "count": len(members)})
    extra_h = meta.get("header_extra", {})
    stream.write(_dump({**extra_h, **header}) + "\n")
    extras = meta.get("record_extra", {})
    prov = obj.provisional if isinstance(obj, Packing) else None
    for C in members:
        more = {"provisional": C.key in prov} if prov is not None else {}
        stream.write(_dump(_record(C, extras.get(C.key), **more)) + "\n")


def _circle(rec: dict, lineno: int, delta: int, D: int) -> CircleVec:
    try:
        vals = {k: rec[k] for k in RECORD_FIELDS}
    except KeyError as e:
        raise ParseError(f"missing field {e.args[0]!r}", lineno) from None
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in vals.values()):
        raise ParseError("circle fields must be integers", lineno)
    if vals["delta"] != delta or vals["D"] != D:
        raise ParseError(
            f"record (delta, D) = ({vals['delta']}, {vals['D']}) disagrees with header ({delta}, {D})", lineno
        )
    try:
        return circle_make(delta, (vals["au"], vals["av"]), vals["b"], vals["c"], D)
    except NotUnitNorm as e:
        raise InvariantViolation(str(e), lineno) from None


def read_jsonl(stream: IO[str] | Iterable[str]) -> Arrangement | Packing:
    lines = iter(stream)
    header = None
    hline = 0
    for hline, raw in enumerate(lines, 1):
        if raw.strip():
            try:
                header = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ParseError(f"bad JSON: {e.msg}", hline) from None
            break
    if not isinstance(header, dict):
        raise ParseError("missing header", hline or 1)
    if header.get("format") != FORMAT:
        raise ParseError(f"unsupported format {header.get('format')!r}", hline)
    kind = header.get("kind")
    if kind not in ("arrangement", "packing"):
        raise ParseError(f"unknown kind {kind!r}", hline)
    delta, D = header.get("delta"), header.get("D")
    if not isinstance(delta, int) or not isinstance(D, int):
        raise ParseError("header needs integer delta and D", hline)
    try:
        ctx = FieldCtx(delta)
    except ValidationError as e:
        raise ParseError(str(e), hline) from None
    window = None
    if header.get("window") is not None:
        try:
            window = Window.parse(",".join(header["window"]))
        except (ValidationError, TypeError) as e:
            raise ParseError(f"bad window: {e}", hline) from None
    circles, extras, prov = [], {}, set()
    lineno = hline
    for lineno, raw in enumerate(lines, hline + 1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e.msg}", lineno) from None
        if not isinstance(rec, dict):
            raise ParseError("record must be an object", lineno)
        C = _circle(rec, lineno, delta, D)
        circles.append(C)
        if rec.get("provisional"):
            prov.add(C.key)
        extra = {k: v for k, v in rec.items() if k not in RECORD_FIELDS and k != "provisional"}
        if extra:
            extras[C.key] = extra
    if header.get("count") is not None and header["count"] != len(circles):
        raise ParseError(f"header count {header['count']} but {len(circles)} records", lineno)
    known = set(HEADER_FIELDS) | {"seed"}
    meta = {
        "delta": delta,
        "D": D,
        "generators": header.get("generators"),
        "header_extra": {k: v for k, v in header.items() if k not in known},
        "record_extra": extras,
    }
    if kind == "packing":
        if not isinstance(header.get("seed"), dict):
            raise ParseError("packing header needs a seed record", hline)
        seed = _circle(header["seed"], hline, delta, D)
        meta["cMax"] = header.get("cMax")
        return Packing(sorted(circles, key=lambda C: C.key), seed, [], prov, window, meta)
    spec = None
    if window is not None and header.get("cMax") is not None:
        spec = ArrangementSpec(ctx, D, window, header["cMax"])
    return Arrangement(spec, circles, meta)


def write_census_csv(rows: Iterable[CensusRow], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["modulus", "residue", "count", "density"])
    for r in rows:
        w.writerow([r.modulus, r.residue, r.count, f"{r.density:.12f}"])
