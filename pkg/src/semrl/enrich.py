"""Knowledge-graph enrichment of transactions before FP-Growth mining.

Two enrichment modes are offered. ``literal`` appends the k-hop triples and
attributes around each reporting sensor with their concrete ids. ``generalized``
relabels each sensor neighborhood canonically (``Junction_0``, ``Pipe_1``, ...)
so that sensors in structurally identical surroundings emit identical items.
Labels are scoped per sensor neighborhood, so two sensors reporting in the
same window can share labels and merge their items; that is intended.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .fpgrowth import RuleSet, mine_rules
from .ingest import Transaction
from .items import Attribute, Measurement, Relation, item_key
from .kg import KGError, KnowledgeGraph, k_hop_attributes, k_hop_topology
from .quality import score_rules

log = logging.getLogger(__name__)

MODES = ("literal", "generalized")


@dataclass(frozen=True)
class EnrichmentConfig:
    k_neighbors: int = 1
    mode: str = "generalized"
    include_attributes: bool = False
    attribute_bins: int = 5

    def __post_init__(self):
        if self.k_neighbors < 0:
            raise ValueError("k_neighbors must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.attribute_bins < 1:
            raise ValueError("attribute_bins must be >= 1")


class AttributeBinner:
    """Equal-width bins per (class, attribute) over the values present in a KG."""

    def __init__(self, kg: KnowledgeGraph, n_bins: int):
        self.n_bins = n_bins
        self.ranges: dict[tuple[str, str], tuple[float, float]] = {}
        for node in kg.nodes.values():
            for attr, value in node.attributes.items():
                key = (node.cls, attr)
                lo, hi = self.ranges.get(key, (value, value))
                self.ranges[key] = (min(lo, value), max(hi, value))

    def __call__(self, cls: str, attr: str, value: float) -> int:
        lo, hi = self.ranges[(cls, attr)]
        if hi == lo:
            return 0
        return min(self.n_bins - 1, max(0, math.floor((value - lo) / (hi - lo) * self.n_bins)))

    def vector(self, kg: KnowledgeGraph, node_id: str) -> tuple:
        node = kg.nodes[node_id]
        return tuple(self(node.cls, a, node.attributes[a]) if a in node.attributes else -1
                     for a in kg.schema.attribute_names(node.cls))


@dataclass(frozen=True)
class CanonicalNeighborhood:
    labels: dict[str, str]
    items: frozenset

    @property
    def root_label(self) -> str:
        return next(iter(self.labels.values()))


def _natural(text: str) -> tuple:
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", text))


def _adjacency(dist: dict[str, int], edges) -> dict[str, list]:
    adj: dict[str, list] = {n: [] for n in dist}
    for e in edges:
        adj[e.subject].append((e.predicate, 0, e.object))
        adj[e.object].append((e.predicate, 1, e.subject))
    return adj


def _refine(adj: dict[str, list], init: dict) -> dict[str, int]:
    """Colour refinement over the neighborhood subgraph; colours never depend on ids."""

    def compress(sig: dict) -> dict[str, int]:
        palette = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        return {n: palette[s] for n, s in sig.items()}

    colors = compress(init)
    for _ in range(len(adj)):
        sig = {n: (colors[n], tuple(sorted((p, d, colors[m]) for p, d, m in adj[n]))) for n in adj}
        refined = compress(sig)
        stable = len(set(refined.values())) == len(set(colors.values()))
        colors = refined
        if stable:
            break
    return colors


# Cap on individualization branches per neighborhood. Balls of water networks
# stay far below it; past it the id order decides and renaming invariance is lost.
MAX_BRANCHES = 4096


def canonicalize_neighborhood(kg: KnowledgeGraph, sensor: str, config: EnrichmentConfig,
                              binner: Optional[AttributeBinner] = None) -> CanonicalNeighborhood:
    """Label the k-hop neighborhood of ``sensor`` as ``Class_i`` in canonical BFS order.

    Siblings are ordered by class, predicate, direction, attribute bins, degree
    and refined colour. Siblings that still tie are individualized one at a
    time; every branch is labelled and the smallest resulting item set wins.
    """
    if sensor not in kg.nodes:
        raise KGError(f"unknown sensor {sensor!r}")
    k = config.k_neighbors
    if config.include_attributes and binner is None:
        binner = AttributeBinner(kg, config.attribute_bins)
    dist = kg.distances(sensor, k)
    edges = kg.ball_edges(dist, k)
    attrs = {n: binner.vector(kg, n) if config.include_attributes else () for n in dist}
    adj = _adjacency(dist, edges)

    def bfs(colors):
        """Labels for one colouring, or the first group of tied siblings."""
        def key(pdv):
            p, d, v = pdv
            return (kg.cls(v), p, d, attrs[v], len(adj[v]), colors[v])

        labels: dict[str, str] = {}
        counters: dict[str, int] = {}

        def assign(node_id):
            cls = kg.cls(node_id)
            labels[node_id] = f"{cls}_{counters.get(cls, 0)}"
            counters[cls] = counters.get(cls, 0) + 1

        assign(sensor)
        order = [sensor]
        for u in order:
            best: dict[str, tuple] = {}
            for pdv in adj[u]:
                v = pdv[2]
                if v not in labels and (v not in best or key(pdv) < best[v]):
                    best[v] = key(pdv)
            fresh = sorted(best, key=lambda v: (best[v], _natural(v)))
            for a, b in zip(fresh, fresh[1:]):
                if best[a] == best[b]:
                    return None, [v for v in fresh if best[v] == best[a]]
            for v in fresh:
                assign(v)
                order.append(v)
        return labels, None

    def items_for(labels):
        items = {Relation(labels[e.subject], e.predicate, labels[e.object]) for e in edges}
        if config.include_attributes:
            for node_id in labels:
                node = kg.nodes[node_id]
                for attr, value in node.attributes.items():
                    items.add(Attribute(labels[node_id], node.cls, attr, binner(node.cls, attr, value)))
        return frozenset(items)

    def rank(labels, items):
        # smallest item set first; among automorphic labellings keep ids that already are labels
        by_label = sorted(labels, key=lambda n: _natural(labels[n]))
        return (sorted(item_key(i) for i in items), [_natural(n) for n in by_label])

    winner = None
    budget = MAX_BRANCHES
    stack = [_refine(adj, {n: (dist[n], kg.cls(n), attrs[n]) for n in dist})]
    while stack and budget:
        colors = stack.pop()
        labels, tied = bfs(colors)
        if tied is None:
            budget -= 1
            items = items_for(labels)
            r = rank(labels, items)
            if winner is None or r < winner[0]:
                winner = (r, labels, items)
            continue
        tied = sorted(tied, key=_natural)
        if len({tuple(sorted(adj[v])) for v in tied}) == 1:
            tied = tied[:1]  # twins: swapping two of them is an automorphism
        for v in reversed(tied):
            stack.append(_refine(adj, {n: (colors[n], n == v) for n in dist}))
    if stack:
        log.warning("neighborhood of %s exceeds %d branches; labels fall back to id order", sensor, MAX_BRANCHES)
    _, labels, items = winner
    return CanonicalNeighborhood(labels, items)


class Enricher:
    """Caches per-sensor context so a whole database is enriched cheaply."""

    def __init__(self, kg: KnowledgeGraph, config: EnrichmentConfig):
        self.kg = kg
        self.config = config
        self.binner = AttributeBinner(kg, config.attribute_bins)
        self._cache: dict[str, tuple] = {}

    def _context(self, sensor: str):
        if sensor not in self._cache:
            if sensor not in self.kg.nodes:
                raise KGError(f"sensor {sensor!r} is not in the knowledge graph")
            cfg = self.config
            if cfg.mode == "literal":
                items = {Relation(*e) for e in k_hop_topology(self.kg, sensor, cfg.k_neighbors)}
                if cfg.include_attributes:
                    items |= {Attribute(n, c, a, self.binner(c, a, v))
                              for n, c, a, v in k_hop_attributes(self.kg, sensor, cfg.k_neighbors)}
                self._cache[sensor] = (sensor, frozenset(items))
            else:
                hood = canonicalize_neighborhood(self.kg, sensor, cfg, self.binner)
                self._cache[sensor] = (hood.labels[sensor], hood.items)
        return self._cache[sensor]

    def __call__(self, t: Transaction) -> Transaction:
        items = set()
        for item in t.items:
            if isinstance(item, Measurement):
                label, context = self._context(item.subject)
                items.add(Measurement(label, item.quantity, item.level))
                items |= context
            else:
                items.add(item)
        return Transaction(t.window_start, frozenset(items))


def enrich_transaction(kg: KnowledgeGraph, t: Transaction, config: EnrichmentConfig) -> Transaction:
    return Enricher(kg, config)(t)


def enrich_db(kg: KnowledgeGraph, db: Sequence[Transaction], config: EnrichmentConfig) -> list[Transaction]:
    enricher = Enricher(kg, config)
    return [enricher(t) for t in db]


def naive_semrl(kg: KnowledgeGraph, db: Sequence[Transaction], config: EnrichmentConfig,
                min_support: float, min_confidence: float) -> RuleSet:
    """Enrich every transaction, run FP-Growth, score each rule's semantic expressivity."""
    enriched = enrich_db(kg, db, config)
    return score_rules(mine_rules(enriched, min_support, min_confidence), kg.schema)
