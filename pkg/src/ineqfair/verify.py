"""Executable checks of the theoretical results, with brute-force ground truth.

Benefit *distributions* (benefit value -> population fraction) are used
wherever an argument takes the population size to infinity, so those cases
are evaluated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, EnumerationLimitError, IneqFairError
from .inequality import generalized_entropy, raw_alpha_moment

MAX_ENUMERATION = 16
TIE_TOL = 1e-12


# ---------------------------------------------------------------------------
# two-point populations
# ---------------------------------------------------------------------------

def _dist_arrays(dist: dict):
    values = np.array(sorted(dist), dtype=np.float64)
    weights = np.array([dist[v] for v in sorted(dist)], dtype=np.float64)
    return values, weights


def dist_index(dist: dict, alpha=2.0) -> float:
    values, weights = _dist_arrays(dist)
    return generalized_entropy(values, alpha, weights=weights)


def dist_moment(dist: dict, alpha=2.0) -> float:
    values, weights = _dist_arrays(dist)
    return raw_alpha_moment(values, alpha, weights=weights)


def theta_q_benefit_distribution(p: float, q: float) -> dict:
    """Benefit distribution when a fraction ``p`` deserves 1 and everyone gets 1 with probability ``q``."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    if not 0.0 <= q <= 1.0:
        raise DomainError("q must lie in [0, 1]")
    return {0: p * (1 - q), 1: p * q + (1 - p) * (1 - q), 2: (1 - p) * q}


def prop2_check(p: float, alpha=2.0) -> bool:
    """Randomising with ``q = 1 - p`` is strictly fairer than the accuracy-optimal rule."""
    if not 0.0 < p < 0.5:
        raise DomainError("p must lie in (0, 0.5)")
    fair = dist_index(theta_q_benefit_distribution(p, 1 - p), alpha)
    accurate = dist_index(theta_q_benefit_distribution(p, 0.0), alpha)
    return fair < accurate


def example1_objective(p: float, q: float) -> float:
    """Constant-free alpha=2 index of the ``q``-randomised classifier (closed form)."""
    mu = 1 - p + q
    return (p * q + (1 - p) * (1 - q)) / mu**2 + (1 - p) * q * 4 / mu**2


def example1_derivative(p: float, q: float) -> float:
    """Closed-form ``d/dq`` of :func:`example1_objective`."""
    return ((1 - p) * (1 - 2 * p) - (3 - 2 * p) * q) / (1 - p + q) ** 3


def example1_qstar(p: float) -> float:
    """Stationary point of :func:`example1_objective` in ``q``."""
    if not 0.0 < p < 0.5:
        raise DomainError("p must lie in (0, 0.5)")
    return (1 - 3 * p + 2 * p * p) / (3 - 2 * p)


def example1_grid_minimizer(p: float, step=0.001) -> float:
    """Brute-force minimiser over a ``q`` grid, evaluating the distribution directly."""
    qs = np.round(np.arange(0.0, 1.0 + step / 2, step), 12)
    vals = [dist_moment(theta_q_benefit_distribution(p, q)) for q in qs]
    return float(qs[int(np.argmin(vals))])


def example1_accuracy_gap(p: float):
    """``(accuracy of fairness-optimal, accuracy of accuracy-optimal, their ratio)``."""
    if not 0.0 < p < 0.5:
        raise DomainError("p must lie in (0, 0.5)")
    return p, 1 - p, (1 - p) / p


def example2_values(p: float, r: float, eps: float):
    """Constant-free index of the accuracy-optimal classifier before and after adding a feature."""
    pre = (4 - 3 * p) / (2 - p) ** 2
    post = (4 - 3 * p - 2 * r - 2 * eps) / (2 - p - r) ** 2
    return pre, post


def example2_distributions(p: float, r: float, eps: float):
    """Benefit distributions behind :func:`example2_values`.

    Raises :class:`DomainError` when a population mass would be negative
    (for instance ``p=0.9, r=0.2, eps=0.001`` leaves ``-0.001`` at benefit 2).
    """
    pre = {1: p, 2: 1 - p}
    post = {0: r / 2 - eps, 1: p + 2 * eps, 2: 1 - p - r / 2 - eps}
    for dist in (pre, post):
        bad = {k: v for k, v in dist.items() if v < -1e-15}
        if bad:
            raise DomainError(f"parameters give negative population mass {bad}")
    return pre, post


# ---------------------------------------------------------------------------
# exhaustive enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    mask: int
    labels: tuple
    loss: float
    overall: float
    between: float
    within: float


@dataclass
class ParetoRecord:
    delta: float
    n_feasible: int
    individual: Candidate | None
    group: Candidate | None
    hypothesis: bool = False
    holds: bool | None = None


@dataclass
class Enumeration:
    y: np.ndarray
    cell: np.ndarray
    group: np.ndarray
    loss: np.ndarray = field(repr=False)
    overall: np.ndarray = field(repr=False)
    between: np.ndarray = field(repr=False)
    within: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    def candidate(self, m: int) -> Candidate:
        labels = tuple(int((m >> int(c)) & 1) for c in self.cell)
        return Candidate(int(m), labels, float(self.loss[m]) / self.y.size,
                         float(self.overall[m]), float(self.between[m]), float(self.within[m]))


def _codes(values):
    _, codes = np.unique(np.array([str(v) for v in values]), return_inverse=True)
    return codes.astype(np.int64)


def enumerate_classifiers(y, groups, cells=None, alpha=2.0) -> Enumeration:
    """Score every classifier that labels each feature cell 0 or 1.

    ``cells`` gives each individual's feature vector (any hashable); by
    default every individual is its own cell, i.e. all ``2**n`` labelings.
    """
    y = np.asarray(y, dtype=np.int64)
    n = y.size
    if n > MAX_ENUMERATION:
        raise EnumerationLimitError(f"enumeration is limited to n <= {MAX_ENUMERATION} individuals (got {n})")
    cell = np.arange(n, dtype=np.int64) if cells is None else _codes(cells)
    group = _codes(groups)
    n_cells = int(cell.max()) + 1
    n_groups = int(group.max()) + 1
    out = kernels.enumerate_cells(y, cell, group, n_cells, n_groups, float(alpha))
    return Enumeration(y, cell, group, *out)


def brute_force_pareto(y, groups, cells=None, alpha=2.0, delta_grid=None) -> list[ParetoRecord]:
    """Solve the individual- and group-unfairness programs exactly for each loss budget.

    Feasible classifiers have normalised 0-1 loss ``<= delta``.  The
    individual-optimal classifier breaks ties by the lowest between-group
    component.  When the two optima differ in between-group unfairness, the
    record states whether the group-optimal one has strictly larger within-
    group and overall unfairness.
    """
    e = enumerate_classifiers(y, groups, cells, alpha)
    n = e.y.size
    grid = [k / n for k in range(n + 1)] if delta_grid is None else list(delta_grid)
    frac_loss = e.loss / n
    records = []
    for delta in grid:
        feasible = e.valid & (frac_loss <= delta + TIE_TOL)
        idx = np.flatnonzero(feasible)
        if idx.size == 0:
            records.append(ParetoRecord(delta, 0, None, None))
            continue
        best_i = e.overall[idx].min()
        ties = idx[e.overall[idx] <= best_i + TIE_TOL]
        ind = int(ties[np.argmin(e.between[ties])])
        grp = int(idx[np.argmin(e.between[idx])])
        ci, cg = e.candidate(ind), e.candidate(grp)
        rec = ParetoRecord(delta, int(idx.size), ci, cg)
        if abs(cg.between - ci.between) > TIE_TOL:
            rec.hypothesis = True
            rec.holds = cg.within > ci.within and cg.overall > ci.overall
        records.append(rec)
    return records


def threshold_classifiers(x):
    """Every rule ``1[x >= t]`` on a scalar feature plus its complement."""
    x = np.asarray(x, dtype=np.float64)
    cuts = np.append(np.unique(x), np.inf)
    rules = []
    for t in cuts:
        lab = (x >= t).astype(np.int64)
        rules.append(lab)
        rules.append(1 - lab)
    return rules


def prop1_check(x, y, alpha=2.0) -> bool:
    """Zero unfairness is attainable iff zero loss is, over threshold rules and complements."""
    y = np.asarray(y, dtype=np.int64)
    if y.size > MAX_ENUMERATION:
        raise EnumerationLimitError(f"limited to n <= {MAX_ENUMERATION}")
    min_loss = math.inf
    min_index = math.inf
    for lab in threshold_classifiers(x):
        min_loss = min(min_loss, int(np.sum(lab != y)))
        b = lab - y + 1
        if b.sum() == 0:
            continue
        min_index = min(min_index, generalized_entropy(b.astype(float), alpha))
    return (min_index <= TIE_TOL) == (min_loss == 0)


# ---------------------------------------------------------------------------
# first-principles decomposition (independent of the kernels)
# ---------------------------------------------------------------------------

def naive_decomposition(values, groups, alpha=2.0):
    """``(between, within)`` from smoothed vectors and per-group indices, by definition."""
    values = np.asarray(values, dtype=np.float64)
    groups = np.asarray(groups, dtype=object)
    mu = values.mean()
    smoothed = np.empty_like(values)
    within = 0.0
    n = values.size
    for g in dict.fromkeys(groups.tolist()):
        sel = groups == g
        mg = values[sel].mean()
        smoothed[sel] = mg
        if mg > 0:
            within += sel.sum() / n * (mg / mu) ** alpha * generalized_entropy(values[sel], alpha)
    between = generalized_entropy(smoothed, alpha)
    return between, within


# ---------------------------------------------------------------------------
# frozen fixtures
# ---------------------------------------------------------------------------

# Eight people in two groups of four; cells 0 and 4 each hold a deserving and an
# undeserving person with identical features, so no classifier is perfect.
PLANTED_Y = (1, 0, 1, 1, 0, 1, 0, 0)
PLANTED_GROUPS = ("a", "a", "a", "a", "b", "b", "b", "b")
PLANTED_CELLS = (0, 0, 1, 2, 3, 4, 4, 5)

# Scores and labels for which the oracle-free sweep is not monotone in tau.
NONMONOTONE_SCORES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
NONMONOTONE_Y = (0, 1, 0, 0, 1, 1)


def sweep_overall(scores, y, taus, alpha=2.0):
    from .analysis import threshold_sweep

    return [r.overall for r in threshold_sweep(scores, y, None, alpha, taus)]


def is_monotone(seq, tol=1e-12) -> bool:
    diffs = np.diff([v for v in seq if not math.isnan(v)])
    return bool(np.all(diffs >= -tol) or np.all(diffs <= tol))


def find_nonmonotone_fixture(seed=0, n=6, tries=1000):
    """Random search for scores/labels whose overall-vs-tau curve is not monotone."""
    rng = np.random.default_rng(seed)
    taus = [k / n for k in range(n + 1)]
    for _ in range(tries):
        scores = np.round(rng.random(n), 3)
        y = rng.integers(0, 2, n)
        if y.min() == y.max():
            continue
        if not is_monotone(sweep_overall(scores, y, taus)):
            return tuple(scores.tolist()), tuple(int(v) for v in y)
    raise IneqFairError("no non-monotone fixture found")


# ---------------------------------------------------------------------------
# full check table
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(name, fn):
    try:
        ok, detail = fn()
    except Exception as e:  # a crashing check is a failing check
        return CheckResult(name, False, f"{type(e).__name__}: {e}")
    return CheckResult(name, bool(ok), detail)


def run_all(seed=0) -> list[CheckResult]:
    from .analysis import threshold_sweep
    from .benefit import apply_scheme, parse_scheme
    from .inequality import decompose
    from .model import oracle_scores
    from .partition import GroupPartition, from_attributes, product
    from .synthetic import figure1_predictions, fpr_scenario

    rng = np.random.default_rng(seed)
    results = []

    def fig1():
        ind = parse_scheme("individual")
        v1 = generalized_entropy(apply_scheme(figure1_predictions("C1"), ind))
        v2 = generalized_entropy(apply_scheme(figure1_predictions("C2"), ind))
        return abs(v1 - 0.2) <= 1e-12 and abs(v2 - 0.3) <= 1e-12, f"C1={v1:.12g} C2={v2:.12g}"

    def fpr():
        fpr_s = parse_scheme("equal-FPR")
        out = []
        for a, b_ in ((0.8, 0.6), (0.6, 0.8)):
            preds = fpr_scenario(a, b_)
            b = apply_scheme(preds, fpr_s)
            part = from_attributes(preds, ["group"])
            part = GroupPartition({k: m & set(b.ids) for k, m in part.groups.items()})
            out.append(decompose(b, part).between)
        ok = round(out[0], 2) == 0.06 and round(out[1], 2) == 0.04
        return ok, f"C1={out[0]:.6f} C2={out[1]:.6f}"

    def prop1():
        cases = [
            ((0.0, 1.0, 2.0, 3.0), (0, 0, 1, 1)),
            ((0.0, 0.0, 1.0, 1.0), (0, 1, 1, 0)),
            ((0.0, 1.0, 2.0), (1, 1, 1)),
        ]
        return all(prop1_check(x, y) for x, y in cases), f"{len(cases)} fixtures"

    def prop2():
        ps = rng.uniform(1e-3, 0.5 - 1e-3, 50)
        return all(prop2_check(float(p)) for p in ps), "50 random p"

    def ex1():
        ok = all(example1_grid_minimizer(p) == 1.0 for p in (0.1, 0.2, 0.3, 0.4))
        ok &= abs(example1_qstar(0.25) - 0.15) < 1e-12
        return ok, "q=1 minimises for p in {0.1,...,0.4}"

    def ex2():
        pre, post = example2_values(0.9, 0.2, 0.001)
        return abs(pre - 1.075) <= 0.01 and abs(post - 1.10) <= 0.01 and post > pre, f"{pre:.7f} -> {post:.7f}"

    def prop3():
        recs = brute_force_pareto(PLANTED_Y, PLANTED_GROUPS, PLANTED_CELLS)
        fired = [r for r in recs if r.hypothesis]
        return bool(fired) and all(r.holds for r in fired), f"hypothesis held at {len(fired)} loss levels"

    def prop45():
        for _ in range(200):
            n = int(rng.integers(4, 40))
            b = rng.integers(0, 3, n).astype(float)
            if b.sum() == 0:
                b[0] = 1.0
            ids = list(range(n))
            g1 = GroupPartition({k: {i for i in ids if i % 3 == k} for k in range(3)})
            g2 =GroupPartition({0: {i for i in ids if i % 2 == 0}, 1: {i for i in ids if i % 2 == 1}})
            coarse, fine = decompose(b, g1), decompose(b, product(g1, g2))
            if coarse.between > fine.between + 1e-9:
                return False, "refinement lowered the between-group component"
            nb, nw = naive_decomposition(b, [i % 3 for i in ids])
            if abs(nb - coarse.between) > 1e-9 or abs(nw - coarse.within) > 1e-9:
                return False, "kernel and first-principles decomposition disagree"
        return True, "200 random cases"

    def oracle():
        y = np.array([0, 0, 0, 1, 1, 0, 1, 0, 0, 1])
        tau = 1 - y.mean()
        rows = threshold_sweep(oracle_scores(y), y, None, 2.0, [tau])
        return rows[0].accuracy == 1.0 and rows[0].overall == 0.0, f"tau={tau:g}"

    def nonmono():
        vals = sweep_overall(NONMONOTONE_SCORES, NONMONOTONE_Y, [k / 6 for k in range(7)])
        return not is_monotone(vals), "frozen fixture"

    for name, fn in (
        ("ten-person example (0.2 / 0.3)", fig1),
        ("two-group FPR example (0.06 / 0.04)", fpr),
        ("zero unfairness iff zero loss", prop1),
        ("randomised classifier beats accuracy-optimal", prop2),
        ("fairness-optimal accuracy can be arbitrarily bad", ex1),
        ("added feature can worsen unfairness", ex2),
        ("group-only optimum raises within and overall", prop3),
        ("refinement raises between / decomposition agrees", prop45),
        ("oracle sweep hits accuracy 1 and unfairness 0", oracle),
        ("unfairness not monotone in tau", nonmono),
    ):
        results.append(_check(name, fn))
    return results
