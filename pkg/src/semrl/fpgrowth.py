"""FP-Growth frequent itemset mining and association rule generation.

Supports are kept as integer counts throughout; ratios appear only on the
emitted rules. The support threshold is ``count >= ceil(min_support * n)``
evaluated with exact rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Optional, Sequence

from .items import item_key


def min_count(min_support: float, n_transactions: int) -> int:
    """Smallest integer count meeting ``min_support`` over ``n`` transactions."""
    _check_ratio(min_support, "min_support")
    ratio = Fraction(Decimal(repr(min_support))) if isinstance(min_support, float) else Fraction(min_support)
    return max(1, math.ceil(ratio * n_transactions))


def _check_ratio(value, name):
    if not 0 < value <= 1:
        raise ValueError(f"{name} must be in (0, 1], got {value}")


class FPNode:
    __slots__ = ("item", "count", "parent", "children", "next")

    def __init__(self, item, parent: Optional["FPNode"]):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict = {}
        self.next: Optional[FPNode] = None

    def __repr__(self):
        return f"FPNode({self.item!r}:{self.count})"


class FPTree:
    """Prefix tree plus header table of same-item node chains."""

    def __init__(self, item_counts: dict, min_count: int, n_transactions: int):
        self.root = FPNode(None, None)
        self.min_count = min_count
        self.n_transactions = n_transactions
        frequent = [(i, c) for i, c in item_counts.items() if c >= min_count]
        frequent.sort(key=lambda ic: (-ic[1], item_key(ic[0])))
        self.order = [i for i, _ in frequent]
        self.rank = {i: r for r, i in enumerate(self.order)}
        self.support = dict(frequent)
        self.heads: dict = {}
        self._tails: dict = {}

    def insert(self, items: Iterable, count: int = 1):
        """Insert one (already filtered or unfiltered) transaction."""
        path = sorted((i for i in set(items) if i in self.rank), key=self.rank.__getitem__)
        node = self.root
        for item in path:
            child = node.children.get(item)
            if child is None:
                child = FPNode(item, node)
                node.children[item] = child
                if item in self._tails:
                    self._tails[item].next = child
                else:
                    self.heads[item] = child
                self._tails[item] = child
            child.count += count
            node = child

    def chain(self, item):
        node = self.heads.get(item)
        while node is not None:
            yield node
            node = node.next

    def nodes(self):
        stack = list(self.root.children.values())
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children.values())

    def single_path(self) -> Optional[list[FPNode]]:
        path = []
        node = self.root
        while node.children:
            if len(node.children) > 1:
                return None
            node = next(iter(node.children.values()))
            path.append(node)
        return path

    def __len__(self):
        return sum(1 for _ in self.nodes())


def build_fp_tree(db: Sequence[Iterable[Hashable]], min_support: float) -> FPTree:
    transactions = [frozenset(t) for t in db]
    if not transactions:
        raise ValueError("cannot build an FP-tree from an empty transaction database")
    threshold = min_count(min_support, len(transactions))
    counts: dict = {}
    for t in transactions:
        for item in t:
            counts[item] = counts.get(item, 0) + 1
    tree = FPTree(counts, threshold, len(transactions))
    for t in transactions:
        tree.insert(t)
    return tree


@dataclass
class FrequentItemsets:
    entries: dict[frozenset, int]
    n_transactions: int

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, itemset) -> int:
        return self.entries[frozenset(itemset)]

    def __contains__(self, itemset):
        return frozenset(itemset) in self.entries

    def __eq__(self, other):
        if not isinstance(other, FrequentItemsets):
            return NotImplemented
        return self.entries == other.entries and self.n_transactions == other.n_transactions


def _conditional_tree(tree: FPTree, item) -> FPTree:
    base = []
    counts: dict = {}
    for node in tree.chain(item):
        path = []
        parent = node.parent
        while parent.item is not None:
            path.append(parent.item)
            parent = parent.parent
        if path:
            base.append((path, node.count))
            for p in path:
                counts[p] = counts.get(p, 0) + node.count
    cond = FPTree(counts, tree.min_count, tree.n_transactions)
    for path, count in base:
        cond.insert(path, count)
    return cond


def _mine(tree: FPTree, suffix: frozenset, out: dict):
    path = tree.single_path()
    if path is not None:
        # every combination of a single path is frequent; support is that of its deepest node
        for r in range(1, len(path) + 1):
            for combo in combinations(path, r):
                out[suffix.union(n.item for n in combo)] = combo[-1].count
        return
    for item in reversed(tree.order):
        itemset = suffix | {item}
        out[itemset] = tree.support[item]
        cond = _conditional_tree(tree, item)
        if cond.order:
            _mine(cond, itemset, out)


def mine_frequent(tree: FPTree, min_support: Optional[float] = None) -> FrequentItemsets:
    """All itemsets with count >= the tree's threshold, with exact counts."""
    if min_support is not None and min_count(min_support, tree.n_transactions) != tree.min_count:
        raise ValueError("min_support differs from the one the tree was built with")
    out: dict[frozenset, int] = {}
    _mine(tree, frozenset(), out)
    return FrequentItemsets(out, tree.n_transactions)


def apriori_oracle(db: Sequence[Iterable[Hashable]], min_support: float, max_items: int = 20) -> FrequentItemsets:
    """Levelwise Apriori with full candidate counting; a slow reference miner."""
    transactions = [frozenset(t) for t in db]
    if not transactions:
        raise ValueError("empty transaction database")
    universe = sorted(set().union(*transactions), key=item_key)
    if len(universe) > max_items:
        raise ValueError(f"{len(universe)} distinct items exceeds the oracle limit of {max_items}")
    threshold = min_count(min_support, len(transactions))

    def count(candidate: frozenset) -> int:
        return sum(1 for t in transactions if candidate <= t)

    out: dict[frozenset, int] = {}
    level = []
    for item in universe:
        c = count(frozenset([item]))
        if c >= threshold:
            level.append(frozenset([item]))
            out[frozenset([item])] = c
    size = 1
    while level:
        prev = set(level)
        candidates = set()
        for a, b in combinations(level, 2):
            union = a | b
            if len(union) == size + 1 and all(union - {x} in prev for x in union):
                candidates.add(union)
        level = []
        for cand in candidates:
            c = count(cand)
            if c >= threshold:
                out[cand] = c
                level.append(cand)
        size += 1
    return FrequentItemsets(out, len(transactions))


@dataclass(frozen=True)
class AssociationRule:
    antecedent: frozenset
    consequent: frozenset
    count: int
    antecedent_count: int
    n_transactions: int
    semantic_expressivity: Optional[float] = None

    def __post_init__(self):
        if not self.antecedent or not self.consequent:
            raise ValueError("rule sides must be non-empty")
        if self.antecedent & self.consequent:
            raise ValueError("rule sides must be disjoint")
        if not 0 < self.count <= self.antecedent_count <= self.n_transactions:
            raise ValueError("inconsistent rule counts")

    @property
    def support(self) -> float:
        return self.count / self.n_transactions

    @property
    def confidence(self) -> float:
        return self.count / self.antecedent_count

    def sort_key(self):
        return (-Fraction(self.count, self.n_transactions),
                -Fraction(self.count, self.antecedent_count),
                [item_key(i) for i in sorted(self.antecedent, key=item_key)],
                [item_key(i) for i in sorted(self.consequent, key=item_key)])

    def __str__(self):
        fmt = lambda side: "{" + ", ".join(str(i) for i in sorted(side, key=item_key)) + "}"  # noqa: E731
        return f"{fmt(self.antecedent)} -> {fmt(self.consequent)}"


@dataclass
class RuleSet:
    rules: list[AssociationRule]
    min_support: float
    min_confidence: float
    n_transactions: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rules = sorted(self.rules, key=AssociationRule.sort_key)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def keyed(self) -> dict:
        return {(r.antecedent, r.consequent): r for r in self.rules}


def generate_rules(fis: FrequentItemsets, min_confidence: float, min_support: float = 0.0) -> RuleSet:
    """Every rule X -> Z\\X with confidence >= ``min_confidence``.

    Consequents grow levelwise per itemset: confidence can only fall as the
    consequent grows, so a failing consequent is never extended.
    """
    _check_ratio(min_confidence, "min_confidence")
    conf = Fraction(Decimal(repr(min_confidence))) if isinstance(min_confidence, float) else Fraction(min_confidence)
    rules = []
    n = fis.n_transactions
    for itemset, z_count in fis.entries.items():
        if len(itemset) < 2:
            continue
        consequents = [frozenset([i]) for i in itemset]
        while consequents:
            passed = []
            for cons in consequents:
                ante = itemset - cons
                if not ante:
                    continue
                a_count = fis.entries[ante]
                if Fraction(z_count, a_count) >= conf:
                    passed.append(cons)
                    rules.append(AssociationRule(ante, cons, z_count, a_count, n))
            grown = set()
            for a, b in combinations(passed, 2):
                union = a | b
                if len(union) == len(a) + 1 and len(union) < len(itemset):
                    grown.add(union)
            ok = set(passed)
            consequents = [c for c in grown if all(c - {x} in ok for x in c)]
    return RuleSet(rules, min_support, min_confidence, n)


def mine_rules(db: Sequence[Iterable[Hashable]], min_support: float, min_confidence: float) -> RuleSet:
    """Plain FP-Growth: tree, frequent itemsets, rules."""
    tree = build_fp_tree(db, min_support)
    return generate_rules(mine_frequent(tree), min_confidence, min_support)
