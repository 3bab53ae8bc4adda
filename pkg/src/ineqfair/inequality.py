"""Inequality indices over benefit vectors.

All indices take either a :class:`BenefitVector` or any 1-D array-like of
non-negative benefits.  The generalized-entropy family, Theil index,
coefficient of variation and the raw alpha-moment also accept ``weights`` so
that a finite benefit *distribution* (values with population fractions) can
be evaluated exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, StructuralError, UndefinedIndexError, UndefinedShareError

DEFAULT_ALPHA = 2.0


@dataclass(frozen=True)
class BenefitVector:
    """Non-negative benefits, one per individual, keyed by individual id."""

    values: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size == 0:
            raise UndefinedIndexError("benefit vector is empty")
        if not np.all(np.isfinite(values)):
            raise DomainError("benefits must be finite")
        if np.any(values < 0):
            bad = int(np.flatnonzero(values < 0)[0])
            raise DomainError(f"benefit at position {bad} is negative ({values[bad]!r})")
        if not np.any(values > 0):
            raise UndefinedIndexError("all benefits are zero; mean benefit must be positive")
        ids = tuple(self.ids) if len(self.ids) else tuple(range(values.size))
        if len(ids) != values.size:
            raise StructuralError(f"{len(ids)} ids for {values.size} benefits")
        if len(set(ids)) != len(ids):
            raise StructuralError("benefit ids must be unique")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", ids)

    def __len__(self):
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def subset(self, ids) -> "BenefitVector":
        pos = self.positions()
        idx = [pos[i] for i in ids]
        return BenefitVector(self.values[idx], tuple(ids))

    def positions(self) -> dict:
        return {i: k for k, i in enumerate(self.ids)}

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.values.tolist()))


@dataclass(frozen=True)
class GroupTerm:
    key: Hashable
    size: int
    mean: float
    within: float
    between: float


@dataclass(frozen=True)
class Decomposition:
    alpha: float
    overall: float
    between: float
    within: float
    group_terms: tuple = field(default_factory=tuple)

    @property
    def share(self) -> float:
        """Fraction of overall inequality attributable to between-group disparity."""
        total = self.between + self.within
        if total <= 0:
            raise UndefinedShareError("overall inequality is zero; between-group share undefined")
        return self.between / total

    def term(self, key) -> GroupTerm:
        for t in self.group_terms:
            if t.key == key:
                return t
        raise KeyError(key)


def _values(b, alpha=None, weights=None, *, allow_zero=True):
    """Return validated ``(values, normalised weights)``."""
    if isinstance(b, BenefitVector):
        values = b.values
    else:
        values = np.asarray(b, dtype=np.float64).ravel()
        if values.size == 0:
            raise UndefinedIndexError("benefit vector is empty")
        if not np.all(np.isfinite(values)):
            raise DomainError("benefits must be finite")
        if np.any(values < 0):
            raise DomainError("benefits must be non-negative")
    if weights is None:
        w = None
    else:
        w = np.asarray(weights, dtype=np.float64).ravel()
        if w.shape != values.shape:
            raise StructuralError("weights must align with benefits")
        if np.any(w < 0) or w.sum() <= 0:
            raise DomainError("weights must be non-negative with a positive total")
        w = w / w.sum()
    mean = values.mean() if w is None else float(w @ values)
    if mean <= 0:
        raise UndefinedIndexError("mean benefit is zero; index undefined")
    positive_mass = values > 0 if w is None else (values > 0) | (w == 0)
    if not allow_zero and not np.all(positive_mass):
        raise DomainError("zero benefits are outside the domain of this index")
    if alpha is not None and alpha < 1 and not np.all(positive_mass):
        raise DomainError(f"zero benefits are outside the domain of the alpha={alpha} index")
    return values, w


def _check_alpha(alpha):
    alpha = float(alpha)
    if alpha in (0.0, 1.0):
        name = "mean_log_deviation" if alpha == 0 else "theil"
        raise DomainError(f"alpha={alpha:g} is a limiting case; use {name}()")
    if not np.isfinite(alpha):
        raise DomainError("alpha must be finite")
    return alpha


def _constant(values, w) -> bool:
    live = values if w is None else values[w > 0]
    return bool(live.min() == live.max())


def _mean(values, w):
    return values.mean() if w is None else float(w @ values)


def _avg(terms, w):
    return float(terms.mean()) if w is None else float(w @ terms)


def generalized_entropy(b, alpha=DEFAULT_ALPHA, weights=None) -> float:
    r"""Generalized entropy index

    .. math:: \frac{1}{n\alpha(\alpha-1)}\sum_i \left[(b_i/\mu)^\alpha - 1\right]

    ``alpha=2`` is half the squared coefficient of variation.
    """
    alpha = _check_alpha(alpha)
    values, w = _values(b, alpha, weights)
    if _constant(values, w):
        return 0.0
    mu = _mean(values, w)
    with np.errstate(divide="ignore"):
        ratio = (values / mu) ** alpha
    if w is not None:
        ratio = np.where(w > 0, ratio, 0.0)
    value = (_avg(ratio, w) - 1.0) / (alpha * (alpha - 1.0))
    return max(value, 0.0)


def theil(b, weights=None) -> float:
    """Theil T index, with ``0 * log 0 = 0``."""
    values, w = _values(b, None, weights)
    if _constant(values, w):
        return 0.0
    r = values / _mean(values, w)
    terms = np.zeros_like(r)
    pos = r > 0
    terms[pos] = r[pos] * np.log(r[pos])
    return max(_avg(terms, w), 0.0)


def mean_log_deviation(b, weights=None) -> float:
    """Mean log deviation (Theil L). Requires strictly positive benefits."""
    values, w = _values(b, None, weights, allow_zero=False)
    if _constant(values, w):
        return 0.0
    mu = _mean(values, w)
    if w is not None:
        values = np.where(w > 0, values, mu)
    return max(_avg(np.log(mu / values), w), 0.0)


def coefficient_of_variation(b, weights=None) -> float:
    """Population standard deviation over the mean."""
    values, w = _values(b, None, weights)
    if _constant(values, w):
        return 0.0
    mu = _mean(values, w)
    var = _avg((values - mu) ** 2, w)
    return float(np.sqrt(var) / mu)


def gini(b) -> float:
    """Gini coefficient, ``sum_ij |b_i - b_j| / (2 n^2 mu)``.

    Kept for comparison only; it does not decompose additively.
    """
    values, _ = _values(b)
    x = np.sort(values)
    n = x.size
    coef = 2.0 * np.arange(1, n + 1) - n - 1
    return max(float(coef @ x) / (n * n * x.mean()), 0.0)


def raw_alpha_moment(b, alpha=DEFAULT_ALPHA, weights=None) -> float:
    """Mean of ``(b_i / mu) ** alpha`` -- the index with its affine constants dropped."""
    values, w = _values(b, alpha if alpha < 1 else None, weights)
    ratio = (values / _mean(values, w)) ** float(alpha)
    if w is not None:
        ratio = np.where(w > 0, ratio, 0.0)
    return _avg(ratio, w)


def _group_labels(b: BenefitVector, partition) -> tuple[list, np.ndarray]:
    groups = getattr(partition, "groups", partition)
    if not isinstance(groups, Mapping):
        raise StructuralError("partition must map group keys to id collections")
    pos = b.positions()
    labels = np.full(b.n, -1, dtype=np.int64)
    keys = list(groups)
    for k, key in enumerate(keys):
        members = groups[key]
        if len(members) == 0:
            raise StructuralError(f"group {key!r} is empty")
        for i in members:
            p = pos.get(i)
            if p is None:
                raise StructuralError(f"id {i!r} in group {key!r} has no benefit")
            if labels[p] != -1:
                raise StructuralError(f"id {i!r} appears in more than one group")
            labels[p] = k
    if np.any(labels < 0):
        missing = b.ids[int(np.flatnonzero(labels < 0)[0])]
        raise StructuralError(f"id {missing!r} is not covered by the partition")
    return keys, labels


def decompose_labels(values, labels, alpha=DEFAULT_ALPHA, keys: Sequence | None = None) -> Decomposition:
    """Decompose with integer group labels ``0..G-1`` aligned to ``values``."""
    alpha = _check_alpha(alpha)
    values, _ = _values(values, alpha)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != values.shape:
        raise StructuralError("labels must align with benefits")
    n_groups = int(labels.max()) + 1 if labels.size else 0
    if labels.min() < 0:
        raise StructuralError("group labels must be non-negative")
    sizes, means, within_g, between_g = kernels.group_decompose(
        np.ascontiguousarray(values), labels, n_groups, alpha
    )
    if np.any(sizes == 0):
        raise StructuralError("every group must be nonempty")
    keys = list(range(n_groups)) if keys is None else list(keys)
    terms = tuple(
        GroupTerm(keys[g], int(sizes[g]), float(means[g]), float(within_g[g]), float(between_g[g]))
        for g in range(n_groups)
    )
    between = max(float(between_g.sum()), 0.0)
    within = max(float(within_g.sum()), 0.0)
    overall = generalized_entropy(values, alpha)
    return Decomposition(alpha, overall, between, within, terms)


def decompose(b: BenefitVector, partition, alpha=DEFAULT_ALPHA) -> Decomposition:
    """Split the generalized entropy of ``b`` into between- and within-group parts.

    ``partition`` is a :class:`~ineqfair.partition.GroupPartition` (or any
    mapping of group key to member ids) covering exactly the ids of ``b``.
    Groups whose members all receive zero benefit contribute nothing to the
    within-group component.
    """
    if not isinstance(b, BenefitVector):
        b = BenefitVector(b)
    keys, labels = _group_labels(b, partition)
    return decompose_labels(b.values, labels, alpha, keys)


def between_group_share(b: BenefitVector, partition, alpha=DEFAULT_ALPHA) -> float:
    return decompose(b, partition, alpha).share
