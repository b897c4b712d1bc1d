"""Semantic expressivity of association rules, plus rule-set statistics.

Per side of a rule, each distinct instance label counts once toward the
instance total. Only attribute items count toward an instance's attribute
coverage; relation and measurement items add instances but no coverage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_DOWN, Decimal
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .fpgrowth import AssociationRule, RuleSet
from .items import Attribute
from .kg import Schema


@dataclass
class SideAnalysis:
    instances: list[str]
    classes: dict[str, Optional[str]]
    attr_count: dict[str, int]
    attr_ratio: Fraction


def _instances(item) -> tuple[str, ...]:
    try:
        return item.instances()
    except AttributeError:
        raise TypeError(f"cannot locate instances in item {item!r}") from None


def analyze_side(side: Iterable, schema: Schema) -> SideAnalysis:
    side = list(side)
    if not side:
        raise ValueError("rule side is empty")
    labels: set[str] = set()
    classes: dict[str, Optional[str]] = {}
    covered: dict[str, set[str]] = {}
    for item in side:
        labels.update(_instances(item))
        if isinstance(item, Attribute):
            if item.cls not in schema:
                raise ValueError(f"class {item.cls!r} not in schema")
            if item.attribute not in schema.attribute_names(item.cls):
                raise ValueError(f"attribute {item.attribute!r} not in class {item.cls}")
            classes[item.subject] = item.cls
            covered.setdefault(item.subject, set()).add(item.attribute)

    ratio = Fraction(1)
    counts = {}
    for label in sorted(labels):
        n_attrs = len(covered.get(label, ()))
        counts[label] = n_attrs
        classes.setdefault(label, None)
        if n_attrs == 0:
            ratio = Fraction(0)
        else:
            ratio *= Fraction(n_attrs, schema.attributes(classes[label]))
    return SideAnalysis(sorted(labels), classes, counts, ratio)


def attr_ratio(side: Iterable, schema: Schema) -> Fraction:
    return analyze_side(side, schema).attr_ratio


def semantic_expressivity(rule, schema: Schema) -> Fraction:
    """(1 - attr_ratio(X)) * (1 - attr_ratio(Y)) / mean instance count of the two sides."""
    x = analyze_side(rule.antecedent, schema)
    y = analyze_side(rule.consequent, schema)
    n = len(x.instances) + len(y.instances)
    if not x.instances or not y.instances:
        raise ValueError("each rule side needs at least one instance")
    return (1 - x.attr_ratio) * (1 - y.attr_ratio) / Fraction(n, 2)


def format_se(value, places: int = 2) -> str:
    """Report form of an SE value: truncated, not rounded (2/7 shows as 0.28)."""
    if value is None:
        return "-"
    exact = Decimal(value.numerator) / Decimal(value.denominator) if isinstance(value, Fraction) \
        else Decimal(repr(value))
    return str(exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_DOWN))


def score_rules(rules: RuleSet, schema: Schema) -> RuleSet:
    scored = [AssociationRule(r.antecedent, r.consequent, r.count, r.antecedent_count,
                              r.n_transactions, float(semantic_expressivity(r, schema)))
              for r in rules]
    return RuleSet(scored, rules.min_support, rules.min_confidence, rules.n_transactions, dict(rules.meta))


_EDGES = np.array([i / 10 for i in range(11)])


@dataclass
class RuleStats:
    count: int
    max_se: Optional[float]
    min_se: Optional[float]
    support_hist: list[int] = field(default_factory=list)
    confidence_hist: list[int] = field(default_factory=list)
    bin_edges: list[float] = field(default_factory=lambda: _EDGES.tolist())

    @property
    def extrema_defined(self) -> bool:
        return self.max_se is not None

    def as_dict(self) -> dict:
        return {"count": self.count, "max_se": self.max_se, "min_se": self.min_se,
                "support_hist": self.support_hist, "confidence_hist": self.confidence_hist,
                "bin_edges": self.bin_edges}


def ruleset_stats(rules: Iterable[AssociationRule]) -> RuleStats:
    rules = list(rules)
    se = [r.semantic_expressivity for r in rules if r.semantic_expressivity is not None]
    sup, _ = np.histogram([r.support for r in rules], bins=_EDGES)
    conf, _ = np.histogram([r.confidence for r in rules], bins=_EDGES)
    return RuleStats(
        count=len(rules),
        max_se=max(se) if se else None,
        min_se=min(se) if se else None,
        support_hist=sup.tolist(),
        confidence_hist=conf.tolist(),
    )
