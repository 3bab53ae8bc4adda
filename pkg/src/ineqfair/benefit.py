"""Benefit functions: mapping classifier outcomes to non-negative benefits."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import ConfigError, DomainError, StructuralError, UndefinedBenefitError
from .inequality import BenefitVector

EXCLUDED = None


class OutcomeType(enum.Enum):
    TP = "tp"
    TN = "tn"
    FP = "fp"
    FN = "fn"

    @classmethod
    def of(cls, y, y_hat) -> "OutcomeType":
        _check_binary(y, "y")
        _check_binary(y_hat, "y_hat")
        if y:
            return cls.TP if y_hat else cls.FN
        return cls.FP if y_hat else cls.TN


def _check_binary(v, name):
    if v not in (0, 1):
        raise DomainError(f"{name} must be 0 or 1, got {v!r}")


def individual_benefit(y, y_hat) -> int:
    """Benefit ``y_hat - y + 1``: 2 for a false positive, 1 if correct, 0 for a false negative."""
    _check_binary(y, "y")
    _check_binary(y_hat, "y_hat")
    return int(y_hat) - int(y) + 1


@dataclass(frozen=True)
class BenefitScheme:
    """Benefit per outcome type; ``None`` marks an outcome the notion ignores."""

    name: str
    tp: float | None
    tn: float | None
    fp: float | None
    fn: float | None

    def __post_init__(self):
        vals = [v for v in self.as_tuple() if v is not EXCLUDED]
        if any(v < 0 for v in vals):
            raise ConfigError(f"scheme {self.name!r}: benefits must be non-negative")
        if not any(v > 0 for v in vals):
            raise ConfigError(f"scheme {self.name!r}: needs at least one positive benefit")

    def as_tuple(self):
        return (self.tp, self.tn, self.fp, self.fn)

    def value(self, outcome: OutcomeType):
        return getattr(self, outcome.value)

    def table(self) -> np.ndarray:
        """2x2 lookup ``table[y, y_hat]``; NaN where excluded."""
        t = np.full((2, 2), np.nan)
        for (y, yh), v in {(1, 1): self.tp, (0, 0): self.tn, (0, 1): self.fp, (1, 0): self.fn}.items():
            if v is not EXCLUDED:
                t[y, yh] = v
        return t

    def spec(self) -> str:
        cells = ["x" if v is EXCLUDED else format(v, "g") for v in self.as_tuple()]
        return f"{self.name}:{','.join(cells)}"


_BUILTIN = (
    BenefitScheme("accuracy", 1, 1, 0, 0),
    BenefitScheme("equal-FPR", EXCLUDED, 1, 0, EXCLUDED),
    BenefitScheme("equal-FNR", 1, EXCLUDED, EXCLUDED, 0),
    BenefitScheme("equal-FDR", 1, EXCLUDED, 0, EXCLUDED),
    BenefitScheme("equal-FOR", EXCLUDED, 1, EXCLUDED, 0),
    BenefitScheme("statistical-parity", 1, 0, 1, 0),
    BenefitScheme("individual", 1, 1, 2, 0),
)


def builtin_schemes() -> list[BenefitScheme]:
    return list(_BUILTIN)


def parse_scheme(text: str) -> BenefitScheme:
    """Resolve a built-in name or a ``name:tp,tn,fp,fn`` override (``x`` = excluded)."""
    text = text.strip()
    if ":" not in text:
        for s in _BUILTIN:
            if s.name.lower() == text.lower():
                return s
        known = ", ".join(s.name for s in _BUILTIN)
        raise ConfigError(f"unknown benefit scheme {text!r} (known: {known})")
    name, _, body = text.partition(":")
    cells = [c.strip() for c in body.split(",")]
    if len(cells) != 4:
        raise ConfigError(f"scheme {text!r}: expected four values tp,tn,fp,fn")
    vals = []
    for c in cells:
        if c.lower() == "x":
            vals.append(EXCLUDED)
            continue
        try:
            vals.append(float(c))
        except ValueError:
            raise ConfigError(f"scheme {text!r}: bad value {c!r}") from None
    return BenefitScheme(name.strip() or "custom", *vals)


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    y_true: int
    y_pred: int | None = None
    score: float | None = None
    attrs: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class PredictionSet:
    records: tuple
    attribute_names: tuple = ()

    def __post_init__(self):
        records = tuple(self.records)
        seen = set()
        for r in records:
            if r.id in seen:
                raise StructuralError(f"duplicate id {r.id!r}")
            seen.add(r.id)
            if r.y_pred is None and r.score is None:
                raise StructuralError(f"record {r.id!r} has neither y_pred nor score")
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

    def __len__(self):
        return len(self.records)

    @property
    def ids(self) -> tuple:
        return tuple(r.id for r in self.records)

    @property
    def y_true(self) -> np.ndarray:
        return np.array([r.y_true for r in self.records], dtype=np.int64)

    @property
    def y_pred(self) -> np.ndarray:
        if any(r.y_pred is None for r in self.records):
            raise StructuralError("some records carry only a score; threshold them first")
        return np.array([r.y_pred for r in self.records], dtype=np.int64)

    @property
    def scores(self) -> np.ndarray:
        if any(r.score is None for r in self.records):
            raise StructuralError("some records have no score")
        return np.array([r.score for r in self.records], dtype=np.float64)

    @property
    def score_only(self) -> bool:
        return all(r.y_pred is None for r in self.records)

    def attribute(self, name) -> list:
        return [r.attrs[name] for r in self.records]

    def with_predictions(self, y_pred) -> "PredictionSet":
        y_pred = np.asarray(y_pred)
        if y_pred.shape != (len(self),):
            raise StructuralError("prediction vector does not match the records")
        recs = tuple(replace(r, y_pred=int(p)) for r, p in zip(self.records, y_pred))
        return PredictionSet(recs, self.attribute_names)

    @classmethod
    def from_arrays(cls, y_true, y_pred=None, scores=None, ids=None, attrs=None):
        """Build from aligned arrays; ``attrs`` maps attribute name to a value list."""
        y_true = np.asarray(y_true)
        n = y_true.size
        ids = [str(i) for i in range(n)] if ids is None else list(ids)
        attrs = dict(attrs or {})
        recs = []
        for k in range(n):
            recs.append(PredictionRecord(
                id=ids[k],
                y_true=int(y_true[k]),
                y_pred=None if y_pred is None else int(y_pred[k]),
                score=None if scores is None else float(scores[k]),
                attrs={a: v[k] for a, v in attrs.items()},
            ))
        return cls(tuple(recs), tuple(attrs))


def scheme_benefits(y, y_hat, scheme: BenefitScheme):
    """Vectorised benefits; returns ``(values, included_mask)``."""
    y = np.asarray(y, dtype=np.int64)
    y_hat = np.asarray(y_hat, dtype=np.int64)
    if y.shape != y_hat.shape:
        raise StructuralError("y and y_hat must align")
    if np.any((y != 0) & (y != 1)) or np.any((y_hat != 0) & (y_hat != 1)):
        raise DomainError("labels must be binary")
    vals = scheme.table()[y, y_hat]
    mask = ~np.isnan(vals)
    return vals[mask], mask


def apply_scheme(preds: PredictionSet, scheme: BenefitScheme) -> BenefitVector:
    """Benefits for the individuals the scheme considers; excluded outcomes are dropped."""
    vals, mask = scheme_benefits(preds.y_true, preds.y_pred, scheme)
    if vals.size == 0:
        raise UndefinedBenefitError(f"scheme {scheme.name!r} excludes every individual")
    if not np.any(vals > 0):
        raise UndefinedBenefitError(f"scheme {scheme.name!r} gives every included individual zero benefit")
    ids = [i for i, keep in zip(preds.ids, mask) if keep]
    return BenefitVector(vals, tuple(ids))


def group_mean_benefit(b: BenefitVector, members) -> float:
    members = list(members)
    if not members:
        raise StructuralError("group has no members")
    pos = b.positions()
    try:
        idx = [pos[i] for i in members]
    except KeyError as e:
        raise StructuralError(f"id {e.args[0]!r} has no benefit") from None
    return float(b.values[idx].mean())
