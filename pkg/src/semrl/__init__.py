"""Semantic association rule learning from sensor time series and a water-network knowledge graph."""
from .enrich import EnrichmentConfig, canonicalize_neighborhood, enrich_transaction, naive_semrl
from .fpgrowth import (AssociationRule, FrequentItemsets, RuleSet, apriori_oracle, build_fp_tree,
                       generate_rules, mine_frequent, mine_rules)
from .ingest import DiscretizationScheme, Transaction, discretize, load_measurements
from .inp import NetworkModel, parse_inp, validate_network
from .items import Attribute, Measurement, Relation
from .kg import Schema, SensorMap, build_kg, default_schema, k_hop_attributes, k_hop_topology
from .quality import attr_ratio, format_se, ruleset_stats, semantic_expressivity

__all__ = [
    "AssociationRule", "Attribute", "DiscretizationScheme", "EnrichmentConfig", "FrequentItemsets",
    "Measurement", "NetworkModel", "Relation", "RuleSet", "Schema", "SensorMap", "Transaction",
    "apriori_oracle", "attr_ratio", "build_fp_tree", "build_kg", "canonicalize_neighborhood",
    "default_schema", "discretize", "enrich_transaction", "format_se", "generate_rules",
    "k_hop_attributes", "k_hop_topology", "load_measurements", "mine_frequent", "mine_rules",
    "naive_semrl", "parse_inp", "ruleset_stats", "semantic_expressivity", "validate_network",
]

__version__ = "0.1.0"
