"""Parser for the topological subset of the EPANET ``.inp`` format.

Only component inventories are read ([JUNCTIONS], [RESERVOIRS], [TANKS],
[PIPES], [PUMPS], [VALVES], [COORDINATES], [TITLE]). Simulation sections
are skipped with a warning. Units are kept exactly as written in the file.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

log = logging.getLogger(__name__)


@dataclass
class Junction:
    id: str
    elevation: float
    base_demand: Optional[float] = None


@dataclass
class Reservoir:
    id: str
    head: float


@dataclass
class Tank:
    id: str
    elevation: float
    diameter: Optional[float] = None


@dataclass
class Pipe:
    id: str
    from_node: str
    to_node: str
    length: float
    diameter: float
    roughness: float


@dataclass
class Pump:
    id: str
    from_node: str
    to_node: str


@dataclass
class Valve:
    id: str
    from_node: str
    to_node: str


@dataclass
class NetworkModel:
    title: str = ""
    junctions: list[Junction] = field(default_factory=list)
    reservoirs: list[Reservoir] = field(default_factory=list)
    tanks: list[Tank] = field(default_factory=list)
    pipes: list[Pipe] = field(default_factory=list)
    pumps: list[Pump] = field(default_factory=list)
    valves: list[Valve] = field(default_factory=list)
    coordinates: dict[str, tuple[float, float]] = field(default_factory=dict)
    parse_warnings: list[str] = field(default_factory=list, compare=False, repr=False)

    @property
    def nodes(self) -> list:
        return [*self.junctions, *self.reservoirs, *self.tanks]

    @property
    def links(self) -> list:
        return [*self.pipes, *self.pumps, *self.valves]

    def counts(self) -> tuple[int, int, int, int, int, int]:
        """(junctions, reservoirs, tanks, pipes, pumps, valves)."""
        return (len(self.junctions), len(self.reservoirs), len(self.tanks),
                len(self.pipes), len(self.pumps), len(self.valves))

    def component(self, component_id: str):
        for c in (*self.nodes, *self.links):
            if c.id == component_id:
                return c
        raise KeyError(component_id)


@dataclass(frozen=True)
class Finding:
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message}" if self.location else self.message


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


class InpParseError(ValueError):
    def __init__(self, section: str, line: int, message: str):
        self.section = section
        self.line = line
        super().__init__(f"[{section}] line {line}: {message}")


class NetworkValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(str(e) for e in report.errors))


# section -> (min columns, max columns); None means unbounded
_LAYOUT = {
    "JUNCTIONS": (2, 4),   # id elev [demand] [pattern]
    "RESERVOIRS": (2, 3),  # id head [pattern]
    "TANKS": (2, 8),       # id elev [diam]  or full EPANET tank row
    "PIPES": (6, 8),       # id n1 n2 len diam rough [minorloss] [status]
    "PUMPS": (3, None),
    "VALVES": (3, None),
    "COORDINATES": (3, 3),
}
_SKIPPED_QUIETLY = {"TITLE", "END"}


def _num(text: str, section: str, lineno: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InpParseError(section, lineno, f"{what} is not numeric: {text!r}") from None
    if not math.isfinite(value):
        raise InpParseError(section, lineno, f"{what} is not finite: {text!r}")
    return value


def parse_inp(text: str, validate: bool = True) -> NetworkModel:
    """Parse INP text into a :class:`NetworkModel`.

    Raises :class:`InpParseError` on malformed rows and
    :class:`NetworkValidationError` when the parsed model breaks an invariant
    (duplicate ids, dangling link endpoints, non-positive length/diameter).
    """
    model = NetworkModel()
    seen_sections: set[str] = set()
    section = None
    title_lines: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise InpParseError(section or "-", lineno, f"malformed section header {line!r}")
            section = line[1:-1].strip().upper()
            seen_sections.add(section)
            if section not in _LAYOUT and section not in _SKIPPED_QUIETLY:
                msg = f"section [{section}] skipped (line {lineno})"
                model.parse_warnings.append(msg)
                log.info(msg)
            continue
        if section is None:
            raise InpParseError("-", lineno, "data before any section header")
        if section == "TITLE":
            title_lines.append(line)
            continue
        if section not in _LAYOUT:
            continue

        cols = line.split()
        lo, hi = _LAYOUT[section]
        if len(cols) < lo or (hi is not None and len(cols) > hi):
            expected = f"{lo}" if lo == hi else f"{lo}..{hi if hi else 'n'}"
            raise InpParseError(section, lineno, f"expected {expected} columns, got {len(cols)}")

        if section == "JUNCTIONS":
            demand = _num(cols[2], section, lineno, "demand") if len(cols) > 2 else None
            model.junctions.append(Junction(cols[0], _num(cols[1], section, lineno, "elevation"), demand))
        elif section == "RESERVOIRS":
            model.reservoirs.append(Reservoir(cols[0], _num(cols[1], section, lineno, "head")))
        elif section == "TANKS":
            if len(cols) == 3:
                diameter = _num(cols[2], section, lineno, "diameter")
            elif len(cols) >= 6:
                # full EPANET row: id elev initlvl minlvl maxlvl diam [minvol] [curve]
                diameter = _num(cols[5], section, lineno, "diameter")
            elif len(cols) == 2:
                diameter = None
            else:
                raise InpParseError(section, lineno, f"expected 2, 3 or 6..8 columns, got {len(cols)}")
            model.tanks.append(Tank(cols[0], _num(cols[1], section, lineno, "elevation"), diameter))
        elif section == "PIPES":
            model.pipes.append(Pipe(
                cols[0], cols[1], cols[2],
                _num(cols[3], section, lineno, "length"),
                _num(cols[4], section, lineno, "diameter"),
                _num(cols[5], section, lineno, "roughness"),
            ))
        elif section == "PUMPS":
            model.pumps.append(Pump(cols[0], cols[1], cols[2]))
        elif section == "VALVES":
            model.valves.append(Valve(cols[0], cols[1], cols[2]))
        elif section == "COORDINATES":
            model.coordinates[cols[0]] = (_num(cols[1], section, lineno, "x"),
                                          _num(cols[2], section, lineno, "y"))

    model.title = "\n".join(title_lines)
    for required in ("JUNCTIONS", "PIPES"):
        if required not in seen_sections:
            raise InpParseError(required, 0, "required section missing")

    if validate:
        report = validate_network(model)
        model.parse_warnings.extend(str(w) for w in report.warnings)
        if report.errors:
            raise NetworkValidationError(report)
    return model


def validate_network(model: NetworkModel) -> ValidationReport:
    report = ValidationReport()
    err = lambda loc, msg: report.errors.append(Finding(loc, msg))  # noqa: E731

    seen: dict[str, str] = {}
    groups = [("JUNCTIONS", model.junctions), ("RESERVOIRS", model.reservoirs),
              ("TANKS", model.tanks), ("PIPES", model.pipes),
              ("PUMPS", model.pumps), ("VALVES", model.valves)]
    for section, comps in groups:
        for i, c in enumerate(comps, start=1):
            loc = f"[{section}] row {i}"
            if c.id in seen:
                err(loc, f"duplicate id {c.id!r} (first seen in [{seen[c.id]}])")
            else:
                seen[c.id] = section
            for name, value in vars(c).items():
                if isinstance(value, float) and not math.isfinite(value):
                    err(loc, f"{c.id}: {name} is not finite")
            if isinstance(c, Pipe):
                if c.length <= 0:
                    err(loc, f"{c.id}: length must be > 0")
                if c.diameter <= 0:
                    err(loc, f"{c.id}: diameter must be > 0")
            if isinstance(c, Tank) and c.diameter is not None and c.diameter <= 0:
                err(loc, f"{c.id}: diameter must be > 0")

    node_ids = {n.id for n in model.nodes}
    adjacency: dict[str, set[str]] = {n: set() for n in node_ids}
    for section, comps in groups[3:]:
        for i, link in enumerate(comps, start=1):
            loc = f"[{section}] row {i}"
            dangling = False
            for end in (link.from_node, link.to_node):
                if end not in node_ids:
                    err(loc, f"{link.id} references unknown node {end!r}")
                    dangling = True
            if link.from_node == link.to_node:
                err(loc, f"{link.id} is a self-loop on {link.from_node!r}")
            elif not dangling:
                adjacency[link.from_node].add(link.to_node)
                adjacency[link.to_node].add(link.from_node)

    for n in model.nodes:
        if not adjacency.get(n.id):
            report.warnings.append(Finding("", f"node {n.id!r} has no incident links"))
    if node_ids:
        start = min(node_ids)
        reached = {start}
        queue = deque([start])
        while queue:
            for nb in adjacency[queue.popleft()]:
                if nb not in reached:
                    reached.add(nb)
                    queue.append(nb)
        if len(reached) < len(node_ids):
            report.warnings.append(Finding(
                "", f"network is not connected: {len(node_ids) - len(reached)} of "
                    f"{len(node_ids)} nodes unreachable from {start!r}"))
    return report


def _fmt(x: Optional[float]) -> str:
    return repr(x)


def to_inp(model: NetworkModel) -> str:
    """Serialize back to INP text; ``parse_inp(to_inp(m)) == m``."""
    out = ["[TITLE]"]
    out += model.title.splitlines()
    out.append("\n[JUNCTIONS]")
    for j in model.junctions:
        cols = [j.id, _fmt(j.elevation)] + ([_fmt(j.base_demand)] if j.base_demand is not None else [])
        out.append(" ".join(cols))
    out.append("\n[RESERVOIRS]")
    out += [f"{r.id} {_fmt(r.head)}" for r in model.reservoirs]
    out.append("\n[TANKS]")
    for t in model.tanks:
        cols = [t.id, _fmt(t.elevation)] + ([_fmt(t.diameter)] if t.diameter is not None else [])
        out.append(" ".join(cols))
    out.append("\n[PIPES]")
    out += [f"{p.id} {p.from_node} {p.to_node} {_fmt(p.length)} {_fmt(p.diameter)} {_fmt(p.roughness)}"
            for p in model.pipes]
    out.append("\n[PUMPS]")
    out += [f"{p.id} {p.from_node} {p.to_node}" for p in model.pumps]
    out.append("\n[VALVES]")
    out += [f"{v.id} {v.from_node} {v.to_node}" for v in model.valves]
    if model.coordinates:
        out.append("\n[COORDINATES]")
        out += [f"{k} {_fmt(x)} {_fmt(y)}" for k, (x, y) in model.coordinates.items()]
    out.append("\n[END]\n")
    return "\n".join(out)
