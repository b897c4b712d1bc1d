"""Item types mined by FP-Growth.

Three kinds of item appear in a transaction:

* ``Measurement``: a sensor reported a discretized level in the window,
  rendered ``m(<label>,<quantity>,<level>)``.
* ``Relation``: a knowledge-graph triple, rendered ``r(<subj>,<pred>,<obj>)``.
* ``Attribute``: a binned component attribute, rendered ``a(<label>,<attr>,<bin>)``.

Items are totally ordered (measurements < relations < attributes, then field
by field) so that tree construction and rule output are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from functools import total_ordering


@total_ordering
class _ItemBase:
    __slots__ = ()
    _rank = -1

    def sort_key(self) -> tuple:
        raise NotImplementedError

    def __lt__(self, other):
        if not isinstance(other, _ItemBase):
            return NotImplemented
        return (self._rank, self.sort_key()) < (other._rank, other.sort_key())

    def instances(self) -> tuple[str, ...]:
        """Instance labels this item mentions."""
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class Measurement(_ItemBase):
    subject: str
    quantity: str
    level: Decimal

    _rank = 0

    def sort_key(self):
        return (self.subject, self.quantity, self.level)

    def instances(self):
        return (self.subject,)

    def __str__(self):
        return f"m({self.subject},{self.quantity},{self.level})"


@dataclass(frozen=True, eq=True)
class Relation(_ItemBase):
    subject: str
    predicate: str
    object: str

    _rank = 1

    def sort_key(self):
        return (self.subject, self.predicate, self.object)

    def instances(self):
        return (self.subject, self.object)

    def __str__(self):
        return f"r({self.subject},{self.predicate},{self.object})"


@dataclass(frozen=True, eq=True)
class Attribute(_ItemBase):
    subject: str
    cls: str
    attribute: str
    bin: int

    _rank = 2

    def sort_key(self):
        return (self.subject, self.cls, self.attribute, self.bin)

    def instances(self):
        return (self.subject,)

    def __str__(self):
        return f"a({self.subject},{self.attribute},{self.bin})"


Item = Measurement | Relation | Attribute


def item_key(item) -> tuple:
    """Sort key usable on a mix of ``Item`` objects and plain strings."""
    if isinstance(item, _ItemBase):
        return (0, item._rank, item.sort_key())
    return (1, type(item).__name__, item)
