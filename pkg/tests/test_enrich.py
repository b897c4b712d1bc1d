import random
from datetime import datetime, timezone
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_force_rules
from semrl.enrich import EnrichmentConfig, Enricher, canonicalize_neighborhood, enrich_db, naive_semrl
from semrl.fpgrowth import mine_rules
from semrl.ingest import Transaction
from semrl.items import Attribute, Measurement, Relation
from semrl.kg import CONNECTED_TO, PLACED_IN, Edge, KGError, KnowledgeGraph, Node, default_schema

T0 = datetime(2023, 1, 1, tzinfo=timezone.utc)
SCHEMA = default_schema()


def m(sensor, level, quantity="pressure"):
    return Measurement(sensor, quantity, Decimal(level))


def tx(*items):
    return Transaction(T0, frozenset(items))


def rename_kg(kg, mapping):
    nodes = [Node(mapping[n.id], n.cls, dict(n.attributes)) for n in kg.nodes.values()]
    edges = [Edge(mapping[e.subject], e.predicate, mapping[e.object]) for e in kg.edges]
    return KnowledgeGraph(nodes, edges, kg.schema)


def twin_kg():
    """Two junctions, each with three pipes, with one pressure sensor each."""
    nodes, edges = [], []
    for side in ("a", "b"):
        nodes.append(Node(f"J{side}", "Junction", {"elevation": 5.0, "base_demand": 1.0}))
        nodes.append(Node(f"S{side}", "WaterPressureSensor"))
        edges.append(Edge(f"S{side}", PLACED_IN, f"J{side}"))
        for i in range(3):
            pid = f"P{side}{i}"
            nodes.append(Node(pid, "Pipe", {"length": 10.0 * (i + 1), "diameter": 100.0, "roughness": 100.0}))
            edges.append(Edge(pid, CONNECTED_TO, f"J{side}"))
    return KnowledgeGraph(nodes, edges, SCHEMA)


@pytest.mark.parametrize("attrs", [False, True])
def test_twin_sensors_share_items(attrs):
    kg = twin_kg()
    cfg = EnrichmentConfig(k_neighbors=2, include_attributes=attrs)
    a = canonicalize_neighborhood(kg, "Sa", cfg)
    b = canonicalize_neighborhood(kg, "Sb", cfg)
    assert a.items == b.items
    assert len([i for i in a.items if isinstance(i, Relation)]) == 4
    enricher = Enricher(kg, cfg)
    assert enricher(tx(m("Sa", 3))).items == enricher(tx(m("Sb", 3))).items


def test_k0_single_label(star_kg):
    hood = canonicalize_neighborhood(star_kg, "WPS", EnrichmentConfig(k_neighbors=0))
    assert hood.labels == {"WPS": "WaterPressureSensor_0"}
    assert hood.items == frozenset()


def test_sample_rule_shape():
    kg = KnowledgeGraph([Node("WPS", "WaterPressureSensor"), Node("J1", "Junction"), Node("P1", "Pipe"),
                         Node("J2", "Junction")],
                        [Edge("WPS", PLACED_IN, "J1"), Edge("P1", CONNECTED_TO, "J1"),
                         Edge("P1", CONNECTED_TO, "J2")], SCHEMA)
    hood = canonicalize_neighborhood(kg, "WPS", EnrichmentConfig(k_neighbors=2))
    assert hood.items == {Relation("WaterPressureSensor_0", PLACED_IN, "Junction_0"),
                          Relation("Pipe_0", CONNECTED_TO, "Junction_0")}
    assert hood.root_label == "WaterPressureSensor_0"


def test_unknown_sensor(star_kg):
    with pytest.raises(KGError):
        canonicalize_neighborhood(star_kg, "nope", EnrichmentConfig())
    with pytest.raises(KGError, match="nope"):
        Enricher(star_kg, EnrichmentConfig())(tx(m("nope", 1)))


def test_config_validation():
    with pytest.raises(ValueError):
        EnrichmentConfig(k_neighbors=-1)
    with pytest.raises(ValueError):
        EnrichmentConfig(mode="fancy")


def test_literal_k1(star_kg):
    t = tx(m("WPS", 40))
    out = Enricher(star_kg, EnrichmentConfig(k_neighbors=1, mode="literal"))(t)
    assert out.items == {m("WPS", 40), Relation("WPS", PLACED_IN, "J1")}


def test_literal_k2_with_attributes(star_kg):
    t = tx(m("WPS", 40))
    cfg = EnrichmentConfig(k_neighbors=2, mode="literal", include_attributes=True)
    out = Enricher(star_kg, cfg)(t)
    relations = {i for i in out.items if isinstance(i, Relation)}
    attributes = {i for i in out.items if isinstance(i, Attribute)}
    assert relations == {Relation("WPS", PLACED_IN, "J1")} | {
        Relation(p, CONNECTED_TO, "J1") for p in "ABC"}
    # J1 carries 2 attributes, each of A, B, C carries 3
    assert len(attributes) == 11
    assert {a.subject for a in attributes} == {"J1", "A", "B", "C"}


def test_literal_k0_is_identity(star_kg):
    t = tx(m("WPS", 40), m("WCS", 2, "demand"))
    assert Enricher(star_kg, EnrichmentConfig(k_neighbors=0, mode="literal"))(t) == t


def test_generalized_rewrites_measurements(star_kg):
    out = Enricher(star_kg, EnrichmentConfig(k_neighbors=1))(tx(m("WPS", 40)))
    assert out.items == {m("WaterPressureSensor_0", 40),
                         Relation("WaterPressureSensor_0", PLACED_IN, "Junction_0")}


def test_canonical_labels_are_fixed_point():
    kg = twin_kg()
    cfg = EnrichmentConfig(k_neighbors=3, include_attributes=True)
    hood = canonicalize_neighborhood(kg, "Sa", cfg)
    labelled = rename_kg(kg.__class__([kg.nodes[n] for n in hood.labels],
                                      [e for e in kg.edges if e.subject in hood.labels and e.object in hood.labels],
                                      kg.schema), hood.labels)
    again = canonicalize_neighborhood(labelled, hood.labels["Sa"], cfg)
    assert all(k == v for k, v in again.labels.items())
    assert again.items == hood.items


def test_edgeless_literal_kg_is_baseline():
    kg = KnowledgeGraph([Node(s, "WaterPressureSensor") for s in ("S1", "S2", "S3")], [], SCHEMA)
    rng = random.Random(3)
    db = [Transaction(T0, frozenset(m(s, rng.randint(0, 2)) for s in rng.sample(["S1", "S2", "S3"], 2)))
          for _ in range(30)]
    cfg = EnrichmentConfig(k_neighbors=2, mode="literal", include_attributes=True)
    semantic = naive_semrl(kg, db, cfg, 0.1, 0.6)
    baseline = mine_rules(db, 0.1, 0.6)
    assert [str(r) for r in semantic] == [str(r) for r in baseline]


def test_planted_cooccurrence_matches_brute_force(star_kg):
    db = [tx(m("WPS", 40), m("WCS", 2, "demand")), tx(m("WPS", 40), m("WCS", 2, "demand")),
          tx(m("WPS", 40), m("WCS", 3, "demand")), tx(m("WPS", 41))]
    for mode in ("literal", "generalized"):
        cfg = EnrichmentConfig(k_neighbors=1, mode=mode)
        enriched = [t.items for t in enrich_db(star_kg, db, cfg)]
        rules = naive_semrl(star_kg, db, cfg, 0.5, 0.75)
        got = {(r.antecedent, r.consequent, r.count, r.antecedent_count) for r in rules}
        assert got == brute_force_rules(enriched, 0.5, 0.75)
        assert all(0 <= r.semantic_expressivity <= 1 for r in rules)
    planted = frozenset({m("WCS", 2, "demand")}), frozenset({m("WPS", 40)})
    literal = naive_semrl(star_kg, db, EnrichmentConfig(mode="literal"), 0.5, 0.75).keyed()
    assert literal[planted].confidence == 1.0


# random KGs

@st.composite
def sensor_kgs(draw):
    n_j = draw(st.integers(1, 6))
    n_p = draw(st.integers(0, 8))
    nodes = [Node(f"J{i}", "Junction", {"elevation": float(draw(st.integers(0, 3)))}) for i in range(n_j)]
    edges = set()
    for i in range(n_p):
        nodes.append(Node(f"P{i}", "Pipe", {"diameter": float(draw(st.integers(0, 3)))}))
        ends = draw(st.lists(st.integers(0, n_j - 1), min_size=1, max_size=2, unique=True))
        edges |= {Edge(f"P{i}", CONNECTED_TO, f"J{e}") for e in ends}
    n_s = draw(st.integers(1, 3))
    for i in range(n_s):
        cls = draw(st.sampled_from(["WaterPressureSensor", "WaterConsumptionSensor"]))
        nodes.append(Node(f"S{i}", cls))
        edges.add(Edge(f"S{i}", PLACED_IN, f"J{draw(st.integers(0, n_j - 1))}"))
    return KnowledgeGraph(nodes, edges, SCHEMA)


def random_db(kg, seed, n=12):
    rng = random.Random(seed)
    sensors = sorted(n for n in kg.nodes if n.startswith("S"))
    db = []
    for _ in range(n):
        chosen = rng.sample(sensors, rng.randint(1, len(sensors)))
        db.append(Transaction(T0, frozenset(m(s, rng.randint(0, 1)) for s in chosen)))
    return db


@given(sensor_kgs(), st.integers(0, 3), st.booleans(), st.integers(0, 10**6))
def test_literal_superset(kg, k, attrs, seed):
    cfg = EnrichmentConfig(k_neighbors=k, mode="literal", include_attributes=attrs)
    db = random_db(kg, seed)
    for before, after in zip(db, enrich_db(kg, db, cfg)):
        assert before.items <= after.items


@given(sensor_kgs(), st.integers(0, 3), st.booleans(), st.randoms(use_true_random=False), st.integers(0, 10**6))
def test_generalized_invariant_under_renaming(kg, k, attrs, rnd, seed):
    ids = list(kg.nodes)
    fresh = [f"X{i}" for i in range(len(ids))]
    rnd.shuffle(fresh)
    mapping = dict(zip(ids, fresh))
    renamed = rename_kg(kg, mapping)
    cfg = EnrichmentConfig(k_neighbors=k, include_attributes=attrs)
    db = random_db(kg, seed)
    db_renamed = [Transaction(t.window_start, frozenset(Measurement(mapping[i.subject], i.quantity, i.level)
                                                         for i in t.items)) for t in db]
    a = enrich_db(kg, db, cfg)
    b = enrich_db(renamed, db_renamed, cfg)
    assert a == b
    if k > 1 or attrs:
        return  # equal enriched dbs already fix the rules; mining them here would be exponential
    assert [str(r) for r in naive_semrl(kg, db, cfg, 0.3, 0.8)] == \
        [str(r) for r in naive_semrl(renamed, db_renamed, cfg, 0.3, 0.8)]
