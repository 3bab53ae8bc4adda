"""Disjoint group partitions built from sensitive attributes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ConfigError, StructuralError


def _sort_key(key):
    return tuple(str(k) for k in key) if isinstance(key, tuple) else (str(key),)


@dataclass(frozen=True)
class GroupPartition:
    """Mapping of group key -> frozenset of ids. Keys iterate in sorted order."""

    groups: Mapping
    attribute_names: tuple = ()

    def __post_init__(self):
        seen = set()
        clean = {}
        for key in sorted(self.groups, key=_sort_key):
            members = frozenset(self.groups[key])
            if not members:
                continue
            overlap = seen & members
            if overlap:
                raise StructuralError(f"id {next(iter(overlap))!r} belongs to more than one group")
            seen |= members
            clean[key] = members
        object.__setattr__(self, "groups", clean)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

    @property
    def population(self) -> frozenset:
        out = frozenset()
        for m in self.groups.values():
            out |= m
        return out

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    def __getitem__(self, key):
        return self.groups[key]

    def sizes(self) -> dict:
        return {k: len(v) for k, v in self.groups.items()}

    def group_of(self) -> dict:
        return {i: k for k, members in self.groups.items() for i in members}

    def same_groups(self, other: "GroupPartition") -> bool:
        """Equality of the induced set partition, ignoring keys."""
        return set(self.groups.values()) == set(other.groups.values())

    @classmethod
    def single(cls, ids: Iterable) -> "GroupPartition":
        return cls({(): frozenset(ids)}, ())

    @classmethod
    def singletons(cls, ids: Iterable) -> "GroupPartition":
        return cls({(i,): frozenset([i]) for i in ids}, ("id",))


def from_attributes(preds, attrs) -> GroupPartition:
    """One group per observed combination of ``attrs`` values.

    ``preds`` is a :class:`~ineqfair.benefit.PredictionSet` or any sequence of
    records with ``id`` and ``attrs``.
    """
    attrs = tuple(attrs)
    records = getattr(preds, "records", preds)
    groups: dict = {}
    for r in records:
        try:
            key = tuple(r.attrs[a] for a in attrs)
        except KeyError as e:
            raise ConfigError(f"unknown attribute {e.args[0]!r} for record {r.id!r}") from None
        groups.setdefault(key, set()).add(r.id)
    return GroupPartition(groups, attrs)


def product(g1: GroupPartition, g2: GroupPartition) -> GroupPartition:
    """Cartesian refinement: ``i`` is in ``(g, h)`` iff it is in both ``g`` and ``h``."""
    if g1.population != g2.population:
        raise StructuralError("partitions cover different populations")
    where = g2.group_of()
    groups: dict = {}
    for k1, members in g1.groups.items():
        for i in members:
            k2 = where[i]
            key = _as_tuple(k1) + _as_tuple(k2)
            groups.setdefault(key, set()).add(i)
    return GroupPartition(groups, g1.attribute_names + g2.attribute_names)


def _as_tuple(k):
    return k if isinstance(k, tuple) else (k,)


def restrict(p: GroupPartition, ids) -> GroupPartition:
    ids = frozenset(ids)
    return GroupPartition({k: m & ids for k, m in p.groups.items()}, p.attribute_names)


def parse_groups(text: str | None) -> list[str]:
    """``"race,gender"`` -> ``["race", "gender"]``; empty or None -> ``[]``."""
    if not text:
        return []
    return [a.strip() for a in text.split(",") if a.strip()]
