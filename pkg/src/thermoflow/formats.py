"""JSON model files.

Shift:            {"states": [...], "edges": [[a, b], ...]}
Flow:             the shift fields plus "roof": <potential>
Potential:        {"window": k, "table": {"a b ...": value, ...}}
Fiber potential:  [{"degree": d, "potential": <potential>}, ...]
Block code:       {"window": k, "map": {"a b ...": target}, "target": <shift>}
Pseudo-orbit:     [{"point": <point>, "duration": t}, ...]
                  or {"entries": [...], "periodic": true}
Point:            {"past": [...], "core": [...], "future": [...],
                   "origin": i, "fiber": s}

Words in table keys are state names separated by spaces.  Unknown fields
are rejected with a :class:`ParseError` naming the field and its line.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .errors import ParseError
from .factors import BlockCode
from .potentials import Potential
from .shift import Sft, SymbolicPoint, check_point
from .suspension import FiberPotential, FlowPoint, SuspensionFlow, check_flow_point

SHIFT_FIELDS = {"states", "edges"}
FLOW_FIELDS = SHIFT_FIELDS | {"roof"}
POTENTIAL_FIELDS = {"window", "table"}
TERM_FIELDS = {"degree", "potential"}
CODE_FIELDS = {"window", "map", "target"}
POINT_FIELDS = {"past", "core", "future", "origin", "fiber"}
ENTRY_FIELDS = {"point", "duration"}
ORBIT_FIELDS = {"entries", "periodic"}


class _Source:
    """Raw text kept around to report line numbers."""

    def __init__(self, text: str, name: str):
        self.text = text
        self.name = name

    def line_of(self, field: str) -> int:
        m = re.search(r'"%s"\s*:' % re.escape(field), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else 1

    def error(self, field: str, message: str) -> ParseError:
        return ParseError(f"{self.name}, line {self.line_of(field)}, field {field!r}: {message}")


def _load(path_or_text, name=None):
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and not path_or_text.lstrip().startswith(("{", "["))):
        path = Path(path_or_text)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc.strerror}") from None
        name = name or str(path)
    else:
        text = path_or_text
        name = name or "<text>"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{name}, line {exc.lineno}: {exc.msg}") from None
    return data, _Source(text, name)


def _check_fields(obj, allowed, required, src: _Source, where: str):
    if not isinstance(obj, dict):
        raise src.error(where, "expected an object")
    for key in obj:
        if key not in allowed:
            raise src.error(key, "unknown field")
    for key in required:
        if key not in obj:
            raise src.error(where, f"missing field {key!r}")


def _shift_from(data, src: _Source) -> Sft:
    _check_fields(data, FLOW_FIELDS if "roof" in data else SHIFT_FIELDS, SHIFT_FIELDS, src, "states")
    states, edges = data["states"], data["edges"]
    if not isinstance(states, list) or not all(isinstance(s, (str, int)) and not isinstance(s, bool) for s in states):
        raise src.error("states", "expected a list of names")
    if not isinstance(edges, list) or not all(isinstance(e, list) and len(e) == 2 for e in edges):
        raise src.error("edges", "expected a list of [from, to] pairs")
    return Sft(states, [tuple(e) for e in edges])


def _state_lookup(g: Sft, token: str, src: _Source, field: str):
    for s in g.states:
        if str(s) == token:
            return s
    raise src.error(field, f"unknown state {token!r}")


def _word(g: Sft, key: str, src: _Source, field: str) -> tuple:
    return tuple(_state_lookup(g, t, src, field) for t in key.split())


def _potential_from(data, g: Sft, src: _Source, field="table") -> Potential:
    _check_fields(data, POTENTIAL_FIELDS, POTENTIAL_FIELDS, src, field)
    window, table = data["window"], data["table"]
    if not isinstance(window, int) or isinstance(window, bool) or window < 1:
        raise src.error("window", "expected a positive integer")
    if not isinstance(table, dict):
        raise src.error("table", "expected an object")
    out = {}
    for key, value in table.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise src.error("table", f"value for {key!r} is not a number")
        out[_word(g, key, src, "table")] = float(value)
    p = Potential(window, out)
    p.check(g)
    return p


def parse_shift(path_or_text) -> Sft:
    data, src = _load(path_or_text)
    return _shift_from(data, src)


def parse_flow(path_or_text) -> SuspensionFlow:
    data, src = _load(path_or_text)
    g = _shift_from(data, src)
    if "roof" not in data:
        raise src.error("roof", "a flow model needs a roof")
    return SuspensionFlow(g, _potential_from(data["roof"], g, src, "roof"))


def parse_model(path_or_text):
    """A :class:`SuspensionFlow` if the file has a roof, else an :class:`Sft`."""
    data, src = _load(path_or_text)
    g = _shift_from(data, src)
    if "roof" in data:
        return SuspensionFlow(g, _potential_from(data["roof"], g, src, "roof"))
    return g


def parse_potential(path_or_text, g: Sft) -> Potential:
    data, src = _load(path_or_text)
    return _potential_from(data, g, src)


def parse_fiber_potential(path_or_text, g: Sft) -> FiberPotential:
    """A fiber potential; a plain potential object is read as its degree-0 term."""
    data, src = _load(path_or_text)
    if isinstance(data, dict):
        return FiberPotential.of(_potential_from(data, g, src))
    if not isinstance(data, list) or not data:
        raise src.error("degree", "expected a nonempty list of terms")
    terms = []
    for term in data:
        _check_fields(term, TERM_FIELDS, TERM_FIELDS, src, "degree")
        d = term["degree"]
        if not isinstance(d, int) or isinstance(d, bool) or d < 0:
            raise src.error("degree", "expected a nonnegative integer")
        terms.append((d, _potential_from(term["potential"], g, src, "potential")))
    return FiberPotential(tuple(terms))


def parse_code(path_or_text, source: Sft) -> BlockCode:
    data, src = _load(path_or_text)
    _check_fields(data, CODE_FIELDS, {"window", "map"}, src, "map")
    window, table = data["window"], data["map"]
    if not isinstance(window, int) or isinstance(window, bool) or window < 1:
        raise src.error("window", "expected a positive integer")
    if not isinstance(table, dict):
        raise src.error("map", "expected an object")
    if "target" in data:
        target = _shift_from(data["target"], src)
        mapping = {_word(source, k, src, "map"): _state_lookup(target, str(v), src, "map") for k, v in table.items()}
        return BlockCode(window, mapping, source, target)
    mapping = {_word(source, k, src, "map"): v for k, v in table.items()}
    return BlockCode.onto_image(source, window, mapping)


def _point_from(data, g: Sft, src: _Source) -> FlowPoint:
    _check_fields(data, POINT_FIELDS, {"past", "future"}, src, "point")
    words = {}
    for key in ("past", "core", "future"):
        raw = data.get(key, [])
        if not isinstance(raw, list):
            raise src.error(key, "expected a list of states")
        words[key] = tuple(_state_lookup(g, str(s), src, key) for s in raw)
    origin = data.get("origin", 0)
    fiber = data.get("fiber", 0.0)
    if not isinstance(origin, int) or isinstance(origin, bool):
        raise src.error("origin", "expected an integer")
    if not isinstance(fiber, (int, float)) or isinstance(fiber, bool):
        raise src.error("fiber", "expected a number")
    x = SymbolicPoint(words["past"], words["core"], words["future"], origin)
    check_point(g, x)
    return FlowPoint(x, float(fiber))


def parse_point(path_or_text, flow: SuspensionFlow) -> FlowPoint:
    data, src = _load(path_or_text)
    p = _point_from(data, flow.base, src)
    check_flow_point(flow, p)
    return p


def parse_pseudo_orbit(path_or_text, flow: SuspensionFlow):
    """``(entries, periodic)`` with entries as ``(FlowPoint, duration)`` pairs."""
    data, src = _load(path_or_text)
    periodic = False
    if isinstance(data, dict):
        _check_fields(data, ORBIT_FIELDS, {"entries"}, src, "entries")
        periodic = bool(data.get("periodic", False))
        data = data["entries"]
    if not isinstance(data, list) or not data:
        raise src.error("entries", "expected a nonempty list")
    entries = []
    for item in data:
        _check_fields(item, ENTRY_FIELDS, ENTRY_FIELDS, src, "point")
        p = _point_from(item["point"], flow.base, src)
        check_flow_point(flow, p)
        d = item["duration"]
        if not isinstance(d, (int, float)) or isinstance(d, bool) or d <= 0:
            raise src.error("duration", "expected a positive number")
        entries.append((p, float(d)))
    return entries, periodic


def dump_shift(g: Sft) -> dict:
    return {"states": list(g.states), "edges": [list(e) for e in sorted(g.edges, key=lambda e: (g.index[e[0]], g.index[e[1]]))]}


def dump_potential(p: Potential) -> dict:
    return {"window": p.window, "table": {" ".join(map(str, w)): float(v) for w, v in p.table.items()}}


def dump_flow(flow: SuspensionFlow) -> dict:
    return {**dump_shift(flow.base), "roof": dump_potential(flow.roof)}


def dump_fiber_potential(f: FiberPotential) -> list:
    return [{"degree": d, "potential": dump_potential(p)} for d, p in f.terms]


def dump_point(p: FlowPoint) -> dict:
    x = p.base_point
    return {
        "past": list(x.past_cycle),
        "core": list(x.core),
        "future": list(x.future_cycle),
        "origin": x.origin_index,
        "fiber": float(p.fiber),
    }
