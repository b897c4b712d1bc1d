"""Typed knowledge graph built from a water-network model and a sensor map."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .inp import Junction, NetworkModel, Pipe, Pump, Reservoir, Tank, Valve

CONNECTED_TO = "connected_to"
PLACED_IN = "placed_in"
PREDICATES = (CONNECTED_TO, PLACED_IN)

NODE_CLASSES = ("Junction", "Reservoir", "Tank")
LINK_CLASSES = ("Pipe", "Pump", "Valve")
COMPONENT_CLASSES = NODE_CLASSES + LINK_CLASSES
QUANTITIES = ("pressure", "demand", "flow")

_CLASS_OF = {Junction: "Junction", Reservoir: "Reservoir", Tank: "Tank",
             Pipe: "Pipe", Pump: "Pump", Valve: "Valve"}


class KGError(ValueError):
    pass


@dataclass(frozen=True)
class Schema:
    """Class name -> ordered attribute names."""

    classes: dict[str, tuple[str, ...]]

    def __post_init__(self):
        for cls, attrs in self.classes.items():
            if len(set(attrs)) != len(attrs):
                raise KGError(f"duplicate attribute names in class {cls}")

    def attributes(self, cls: str) -> int:
        try:
            return len(self.classes[cls])
        except KeyError:
            raise KGError(f"class {cls!r} not in schema") from None

    def attribute_names(self, cls: str) -> tuple[str, ...]:
        try:
            return self.classes[cls]
        except KeyError:
            raise KGError(f"class {cls!r} not in schema") from None

    def __contains__(self, cls: str) -> bool:
        return cls in self.classes


def default_schema() -> Schema:
    return Schema({
        "Junction": ("elevation", "base_demand"),
        "Reservoir": ("head",),
        "Tank": ("elevation", "diameter"),
        "Pipe": ("length", "diameter", "roughness"),
        "Pump": (),
        "Valve": (),
        "WaterPressureSensor": (),
        "WaterConsumptionSensor": (),
        "FlowSensor": (),
    })


def parse_schema(text: str) -> Schema:
    """Read the schema text format.

    One class per line, ``ClassName: attr1, attr2, ...``. An empty attribute
    list is allowed (``FlowSensor:``). ``#`` starts a comment. Order of
    classes and of attributes is preserved.
    """
    classes: dict[str, tuple[str, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise KGError(f"schema line {lineno}: expected 'Class: attr, ...'")
        name, _, rest = line.partition(":")
        name = name.strip()
        if not name or name in classes:
            raise KGError(f"schema line {lineno}: missing or repeated class name {name!r}")
        classes[name] = tuple(a.strip() for a in rest.split(",") if a.strip())
    return Schema(classes)


def load_schema(path) -> Schema:
    return parse_schema(Path(path).read_text())


@dataclass(frozen=True)
class SensorEntry:
    sensor_id: str
    sensor_class: str
    host_component: str
    quantity: str


@dataclass(frozen=True)
class SensorMap:
    entries: tuple[SensorEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [e.sensor_id for e in self.entries]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise KGError(f"duplicate sensor ids: {', '.join(dupes)}")
        for e in self.entries:
            if e.quantity not in QUANTITIES:
                raise KGError(f"sensor {e.sensor_id}: unknown quantity {e.quantity!r}")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, sensor_id):
        return any(e.sensor_id == sensor_id for e in self.entries)

    def quantities(self) -> dict[str, str]:
        return {e.sensor_id: e.quantity for e in self.entries}


def load_sensor_map(path) -> SensorMap:
    """Read a CSV with header ``sensor_id,sensor_class,host_component,quantity``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["sensor_id", "sensor_class", "host_component", "quantity"]
        if reader.fieldnames != expected:
            raise KGError(f"{path}: header must be {','.join(expected)}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if None in row or any(v is None or not v.strip() for v in row.values()):
                raise KGError(f"{path} line {lineno}: expected 4 non-empty fields")
            entries.append(SensorEntry(*(row[k].strip() for k in expected)))
    return SensorMap(entries)


@dataclass(frozen=True)
class Node:
    id: str
    cls: str
    attributes: dict[str, float] = field(default_factory=dict)


class Edge(NamedTuple):
    subject: str
    predicate: str
    object: str


class KnowledgeGraph:
    """Immutable once built. Use :func:`build_kg` or the constructor directly."""

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge], schema: Schema):
        self.schema = schema
        self.nodes: dict[str, Node] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise KGError(f"duplicate node id {n.id!r}")
            for attr in n.attributes:
                if n.cls not in schema or attr not in schema.attribute_names(n.cls):
                    raise KGError(f"attribute {attr!r} of class {n.cls} not in schema")
            self.nodes[n.id] = n
        for e in edges:
            for end in (e.subject, e.object):
                if end not in self.nodes:
                    raise KGError(f"edge {e} references unknown node {end!r}")
        self.edges: tuple[Edge, ...] = tuple(sorted(set(edges), key=self.edge_key))
        self._adj: dict[str, list[tuple[str, Edge]]] = {n: [] for n in self.nodes}
        for e in self.edges:
            self._adj[e.subject].append((e.object, e))
            self._adj[e.object].append((e.subject, e))

    def edge_key(self, e: Edge) -> tuple:
        return (e.predicate, self.nodes[e.subject].cls, self.nodes[e.object].cls,
                e.subject, e.object)

    def cls(self, node_id: str) -> str:
        return self.nodes[node_id].cls

    def neighbors(self, node_id: str) -> list[tuple[str, Edge]]:
        return self._adj[node_id]

    def degree(self, node_id: str) -> int:
        return len(self._adj[node_id])

    def _require(self, node_id: str):
        if node_id not in self.nodes:
            raise KGError(f"unknown node {node_id!r}")

    def distances(self, start: str, k: int) -> dict[str, int]:
        """Undirected BFS hop distance from ``start`` for every node within ``k`` hops."""
        self._require(start)
        if k < 0:
            raise KGError("k must be >= 0")
        dist = {start: 0}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            if dist[u] == k:
                continue
            for v, _ in self._adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def ball_edges(self, dist: dict[str, int], k: int) -> list[Edge]:
        # an edge lies on a path of <= k hops iff its nearer endpoint is within k-1
        return [e for e in self.edges
                if e.subject in dist and e.object in dist
                and min(dist[e.subject], dist[e.object]) <= k - 1]

    def __repr__(self):
        return f"KnowledgeGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"


def build_kg(model: NetworkModel, sensors: SensorMap, schema: Schema | None = None) -> KnowledgeGraph:
    schema = schema or default_schema()
    nodes = []
    for comp in (*model.nodes, *model.links):
        cls = _CLASS_OF[type(comp)]
        if cls not in schema:
            raise KGError(f"class {cls} not in schema")
        attrs = {}
        for name, value in vars(comp).items():
            if name in ("id", "from_node", "to_node") or value is None:
                continue
            if name not in schema.attribute_names(cls):
                raise KGError(f"attribute {name!r} of class {cls} not in schema")
            attrs[name] = float(value)
        nodes.append(Node(comp.id, cls, attrs))

    component_ids = {n.id for n in nodes}
    edges = []
    for link in model.links:
        edges.append(Edge(link.id, CONNECTED_TO, link.from_node))
        edges.append(Edge(link.id, CONNECTED_TO, link.to_node))
    for s in sensors:
        if s.host_component not in component_ids:
            raise KGError(f"sensor {s.sensor_id}: host component {s.host_component!r} not in network")
        if s.sensor_class not in schema:
            raise KGError(f"sensor {s.sensor_id}: class {s.sensor_class} not in schema")
        if s.sensor_class in COMPONENT_CLASSES:
            raise KGError(f"sensor {s.sensor_id}: {s.sensor_class} is a component class")
        if s.sensor_id in component_ids:
            raise KGError(f"sensor id {s.sensor_id!r} collides with a component id")
        nodes.append(Node(s.sensor_id, s.sensor_class, {}))
        edges.append(Edge(s.sensor_id, PLACED_IN, s.host_component))
    return KnowledgeGraph(nodes, edges, schema)


def k_hop_topology(kg: KnowledgeGraph, start: str, k: int) -> list[Edge]:
    """Every edge on an undirected path of at most ``k`` hops from ``start``."""
    dist = kg.distances(start, k)
    return kg.ball_edges(dist, k)


def k_hop_attributes(kg: KnowledgeGraph, start: str, k: int) -> list[tuple[str, str, str, float]]:
    """(node id, class, attribute, value) for ``start`` and every node within ``k`` hops."""
    dist = kg.distances(start, k)
    out = []
    for node_id in sorted(dist, key=lambda n: (kg.cls(n), n)):
        node = kg.nodes[node_id]
        order = kg.schema.attribute_names(node.cls)
        for attr in sorted(node.attributes, key=order.index):
            out.append((node_id, node.cls, attr, node.attributes[attr]))
    return out
