"""JSON diagram files and run reports.

A diagram file looks like

    {"p": 2, "m": 6, "n": 3,
     "objects": {"1/0": [3], "2/1": [1, 5], ...},
     "maps": {"1/0->2/0": [[2]], ...}}

Matrices are row-major with rows indexed by source summands.  Integers may be
negative; they are reduced on load.  Files written here hold canonical
residues with sorted keys, so emit -> load -> emit is byte-identical.  A file
with ``"level": "module"`` holds a module-level diagram (column and 0+/0
included); loading it standardises the column.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any

from .diagram import EDiagram, PeriodicDiagram, format_pos, parse_pos, standardize_column
from .errors import ContractError, OctaError, StructureError
from .modcat import Context, FpObject


class FormatError(OctaError, ValueError):
    """The file is not a well-formed diagram document."""


def _obj_exponents(X: FpObject) -> list[int]:
    return list(X.exponents)


def diagram_to_dict(D) -> dict[str, Any]:
    n = D.n
    doc: dict[str, Any] = {"p": D.ctx.p, "m": D.ctx.m, "n": n}
    if isinstance(D, EDiagram):
        doc["level"] = "module"
        objects = {pos: X for pos, X in D.objects.items() if not X.is_zero()}
        maps = {k: f for k, f in D.maps.items() if f.source.rank and f.target.rank}
        doc["objects"] = {format_pos(pos, n): _obj_exponents(X) for pos, X in objects.items()}
        doc["maps"] = {
            f"{format_pos(P, n)}->{format_pos(Q, n)}": f.rows() for (P, Q), f in maps.items()
        }
        return doc
    doc["objects"] = {
        format_pos(pos, n): _obj_exponents(X) for pos, X in D.objects.items() if not X.is_zero()
    }
    doc["maps"] = {
        f"{format_pos(P, n)}->{format_pos(Q, n)}": f.rows()
        for (P, Q), f in D.maps.items()
        if f.source.rank and f.target.rank
    }
    return doc


def _compact(value) -> str:
    return json.dumps(value, separators=(", ", ": "))


def dumps(D) -> str:
    doc = diagram_to_dict(D)
    lines = ["{"]
    keys = sorted(doc)
    for i, key in enumerate(keys):
        tail = "," if i < len(keys) - 1 else ""
        value = doc[key]
        if isinstance(value, dict):
            lines.append(f"  {json.dumps(key)}: {{")
            inner = sorted(value)
            for j, k in enumerate(inner):
                t2 = "," if j < len(inner) - 1 else ""
                lines.append(f"    {json.dumps(k)}: {_compact(value[k])}{t2}")
            lines.append(f"  }}{tail}")
        else:
            lines.append(f"  {json.dumps(key)}: {_compact(value)}{tail}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump(D, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(D))


def _require_int(doc, key) -> int:
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise FormatError(f"field {key!r} must be an integer")
    return v


def _matrix(value, label) -> list[list[int]]:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise FormatError(f"map {label}: matrix must be a list of rows")
    for r in value:
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in r):
            raise FormatError(f"map {label}: entries must be integers")
    return value


def from_dict(doc: dict[str, Any], standardize: bool = True):
    """Build a diagram from a parsed document.

    Returns a PeriodicDiagram; module-level documents are standardised unless
    ``standardize`` is false, in which case the EDiagram is returned.
    """
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object")
    p, m, n = (_require_int(doc, k) for k in ("p", "m", "n"))
    try:
        ctx = Context(p, m)
    except ContractError as exc:
        raise FormatError(str(exc)) from exc
    if n < 0:
        raise FormatError("n must be non-negative")
    objs_raw = doc.get("objects")
    maps_raw = doc.get("maps", {})
    if not isinstance(objs_raw, dict) or not isinstance(maps_raw, dict):
        raise FormatError("'objects' and 'maps' must be objects")
    objects = {}
    for key, exps in objs_raw.items():
        try:
            pos = parse_pos(key, n)
        except ContractError as exc:
            raise FormatError(str(exc)) from exc
        if not isinstance(exps, list) or not all(isinstance(e, int) and not isinstance(e, bool) for e in exps):
            raise FormatError(f"object {key}: exponent list expected")
        if any(not 0 <= e <= m for e in exps):
            raise StructureError(f"exponent outside [0, {m}]", position=key)
        objects[pos] = FpObject.from_exponents(m, exps)
    maps = {}
    for key, mat in maps_raw.items():
        if "->" not in key:
            raise FormatError(f"map key {key!r} must look like 'P->Q'")
        a, b = key.split("->", 1)
        try:
            P, Q = parse_pos(a, n), parse_pos(b, n)
        except ContractError as exc:
            raise FormatError(str(exc)) from exc
        maps[(P, Q)] = _matrix(mat, key)
    level = doc.get("level", "stable")
    if level == "module":
        try:
            E = EDiagram.build(ctx, n, objects, maps)
        except StructureError:
            raise
        except ContractError as exc:
            raise StructureError(str(exc)) from exc
        return standardize_column(E) if standardize else E
    if level != "stable":
        raise FormatError(f"unknown level {level!r}")
    # shapes are validated per map inside build, which names the position
    return PeriodicDiagram.build(ctx, n, objects, maps)


def loads(text: str, standardize: bool = True):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return from_dict(doc, standardize)


def load(path: str, standardize: bool = True):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), standardize)


# --- reports -----------------------------------------------------------------------

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


@dataclass
class CheckRecord:
    name: str
    status: str  # pass | fail | inconclusive
    payload: dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self):
        return {"name": self.name, "status": self.status, "payload": self.payload, "seconds": round(self.seconds, 4)}


@dataclass
class Report:
    command: str
    checks: list[CheckRecord] = field(default_factory=list)

    def add(self, name, status, payload=None, seconds=0.0) -> CheckRecord:
        rec = CheckRecord(name, status, payload or {}, seconds)
        self.checks.append(rec)
        return rec

    def timed(self, name, fn):
        """Run fn() -> (status, payload) and record it with its wall time."""
        t0 = time.perf_counter()
        status, payload = fn()
        return self.add(name, status, payload, time.perf_counter() - t0)

    @property
    def exit_code(self) -> int:
        statuses = {c.status for c in self.checks}
        if "fail" in statuses:
            return EXIT_FAIL
        if "inconclusive" in statuses:
            return EXIT_INCONCLUSIVE
        return EXIT_PASS

    def to_dict(self):
        return {
            "command": self.command,
            "status": {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_INCONCLUSIVE: "inconclusive"}[self.exit_code],
            "exit_code": self.exit_code,
            "checks": [c.to_dict() for c in self.checks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
