"""Experiment pipelines: threshold sweeps, between-group shares, and
unfairness tracking under constrained training."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .benefit import BenefitScheme, PredictionSet, apply_scheme, parse_scheme, scheme_benefits
from .errors import DomainError, IneqFairError, StructuralError
from .fairtrain import ConstraintSpec, Hyperparams, constraint_sweep
from .inequality import DEFAULT_ALPHA, decompose, decompose_labels
from .model import accept_count, accuracy, ranks
from .partition import GroupPartition, from_attributes, restrict

INDIVIDUAL = parse_scheme("individual")


def default_tau_grid():
    return [round(0.01 * k, 2) for k in range(101)]


def parse_tau_grid(text: str) -> list:
    start, stop, step = (float(t) for t in text.split(":"))
    count = int(round((stop - start) / step)) + 1
    return [round(start + step * k, 10) for k in range(count)]


@dataclass
class SweepRow:
    tau: float
    accuracy: float
    overall: float = math.nan
    between: float = math.nan
    within: float = math.nan
    group_within: dict = field(default_factory=dict)
    group_mean: dict = field(default_factory=dict)
    defined: bool = True
    note: str = ""


def _group_index(ids, partition):
    if partition is None:
        return np.zeros(len(ids), dtype=np.int64), [()]
    where = partition.group_of()
    keys = list(partition.groups)
    pos = {k: g for g, k in enumerate(keys)}
    try:
        idx = np.array([pos[where[i]] for i in ids], dtype=np.int64)
    except KeyError as e:
        raise StructuralError(f"id {e.args[0]!r} is not in the partition") from None
    return idx, keys


def _row(tau, y, yhat, gidx, keys, alpha, scheme):
    acc = accuracy(y, yhat)
    vals, mask = scheme_benefits(y, yhat, scheme)
    if vals.size == 0 or not np.any(vals > 0):
        return SweepRow(tau, acc, defined=False, note="no included individual has positive benefit")
    present, labels = np.unique(gidx[mask], return_inverse=True)
    try:
        d = decompose_labels(vals, labels, alpha, [keys[g] for g in present])
    except IneqFairError as e:
        return SweepRow(tau, acc, defined=False, note=str(e))
    return SweepRow(
        tau, acc, d.overall, d.between, d.within,
        {t.key: t.within for t in d.group_terms},
        {t.key: t.mean for t in d.group_terms},
    )


def threshold_sweep(scores, y, partition: GroupPartition | None = None, alpha=DEFAULT_ALPHA,
                    tau_grid=None, scheme: BenefitScheme = INDIVIDUAL, tie_seed=0, ids=None,
                    workers=1) -> list[SweepRow]:
    """Decompose unfairness of the ranked-threshold classifier at each ``tau``.

    One seeded tie-break order is shared by every grid point, so accepted
    sets are nested as ``tau`` grows.  Rows whose benefit vector is empty or
    all zero are flagged ``defined=False`` instead of aborting the sweep.
    """
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if scores.shape != y.shape:
        raise StructuralError("scores and labels must align")
    n = scores.size
    ids = tuple(range(n)) if ids is None else tuple(ids)
    grid = default_tau_grid() if tau_grid is None else list(tau_grid)
    if any(not 0.0 <= t <= 1.0 for t in grid):
        raise DomainError("tau grid must lie within [0, 1]")
    gidx, keys = _group_index(ids, partition)
    r = ranks(scores, tie_seed)

    def one(tau):
        yhat = (r >= n - accept_count(n, tau)).astype(np.int64)
        return _row(tau, y, yhat, gidx, keys, alpha, scheme)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, grid))
    return [one(t) for t in grid]


@dataclass
class ShareRow:
    attributes: tuple
    n_groups: int
    between_share: float
    defined: bool = True


def share_by_attribute_sets(preds: PredictionSet, attribute_sets, alpha=DEFAULT_ALPHA,
                            scheme: BenefitScheme = INDIVIDUAL) -> list[ShareRow]:
    """Between-group share of overall unfairness for each grouping."""
    b = apply_scheme(preds, scheme)
    rows = []
    for attrs in attribute_sets:
        attrs = tuple(attrs)
        part = restrict(from_attributes(preds, attrs), b.ids)
        d = decompose(b, part, alpha)
        total = d.between + d.within
        if total <= 0:
            rows.append(ShareRow(attrs, len(part), math.nan, False))
        else:
            rows.append(ShareRow(attrs, len(part), d.share))
    return rows


@dataclass
class TrackRow:
    factor: float
    loss: float
    cov: float
    accuracy: float
    overall: float
    between: float
    within: float
    group_within: dict


def constrained_unfairness_track(train, spec: ConstraintSpec, alpha=DEFAULT_ALPHA,
                                 scheme: BenefitScheme = INDIVIDUAL, test=None,
                                 hyperparams: Hyperparams | None = None) -> list[TrackRow]:
    """Train across the factor grid on ``train``; decompose unfairness on ``test``.

    Groups are the binarised sensitive attribute (reference vs. the rest).
    ``test`` defaults to ``train``.
    """
    test = train if test is None else test
    rows = constraint_sweep(train, spec, hyperparams)
    z = spec.z(test)
    labels = [str(spec.reference), f"non-{spec.reference}"]
    group = np.array([labels[int(v)] for v in z], dtype=object)
    out = []
    for r in rows:
        yhat = (r.model.response(test.features) > 0).astype(np.int64)
        vals, mask = scheme_benefits(test.labels, yhat, scheme)
        present, idx = np.unique(group[mask], return_inverse=True)
        d = decompose_labels(vals, idx, alpha, list(present))
        out.append(TrackRow(
            r.factor, r.loss, r.fnr_cov, accuracy(test.labels, yhat),
            d.overall, d.between, d.within, {t.key: t.within for t in d.group_terms},
        ))
    return out
