import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ineqfair.errors import DomainError, StructuralError, UndefinedIndexError, UndefinedShareError
from ineqfair.inequality import (
    BenefitVector, between_group_share, coefficient_of_variation, decompose, generalized_entropy,
    gini, mean_log_deviation, raw_alpha_moment, theil,
)
from ineqfair.partition import GroupPartition

C1 = [1, 1, 1, 0, 2, 2, 1, 1, 1, 0]
C1_IDS = tuple(f"i{k}" for k in range(1, 11))
FIG1_PART = GroupPartition({
    "g1": {"i1", "i2"}, "g2": {"i3", "i4", "i5", "i6"}, "g3": {"i7", "i8", "i9", "i10"},
})


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


# -- closed-form examples ---------------------------------------------------

def test_ge_examples():
    assert abs(generalized_entropy(C1, 2) - 0.2) <= 1e-12
    assert generalized_entropy([3.0] * 7, 2) == 0.0
    assert generalized_entropy([3.0] * 7, 0.5) == 0.0
    assert abs(generalized_entropy([1, 2, 3], 2) - 1 / 12) <= 1e-12


def test_theil_examples():
    assert theil([2, 2, 2]) == 0.0
    assert abs(theil([1, 3]) - 0.5 * (0.5 * math.log(0.5) + 1.5 * math.log(1.5))) <= 1e-12
    assert abs(theil([1, 3]) - 0.130812) < 1e-6
    assert abs(theil([0, 2]) - math.log(2)) <= 1e-12


def test_mld_examples():
    assert mean_log_deviation([5, 5]) == 0.0
    assert abs(mean_log_deviation([1, 3]) - 0.5 * (math.log(2) + math.log(2 / 3))) <= 1e-12
    # (2 ln 2 + ln(1/2)) / 3 = ln(2) / 3
    assert abs(mean_log_deviation([1, 1, 4]) - math.log(2) / 3) <= 1e-12
    with pytest.raises(DomainError):
        mean_log_deviation([0, 1])


def test_cv_examples():
    assert coefficient_of_variation([4, 4]) == 0.0
    assert abs(coefficient_of_variation(C1) - math.sqrt(0.4)) <= 1e-12
    assert abs(coefficient_of_variation([1, 3]) - 0.5) <= 1e-12


def test_gini_examples():
    assert gini([2, 2, 2]) == 0.0
    assert abs(gini([0, 1]) - 0.5) <= 1e-12
    assert abs(gini([1, 2, 3]) - 2 / 9) <= 1e-12


def test_raw_moment_examples():
    p = 0.9
    assert abs(raw_alpha_moment([1, 2], 2, weights=[p, 1 - p]) - (4 - 3 * p) / (2 - p) ** 2) <= 1e-12
    assert raw_alpha_moment([3, 3, 3], 2) == pytest.approx(1.0, abs=1e-15)
    p, r, eps = 0.6, 0.2, 0.001
    post = raw_alpha_moment([0, 1, 2], 2, weights=[r / 2 - eps, p + 2 * eps, 1 - p - r / 2 - eps])
    assert abs(post - (4 - 3 * p - 2 * r - 2 * eps) / (2 - p - r) ** 2) <= 1e-12


def test_decompose_fig1():
    d = decompose(BenefitVector(np.array(C1, float), C1_IDS), FIG1_PART, 2)
    assert abs(d.between - 0.025) <= 1e-12
    assert abs(d.within - 0.175) <= 1e-12
    assert abs(d.overall - 0.2) <= 1e-12
    assert d.term("g2").mean == 1.25
    assert sum(t.size for t in d.group_terms) == 10
    assert abs(d.share - 0.125) <= 1e-12


def test_decompose_trivial_partitions():
    b = BenefitVector(np.array(C1, float), C1_IDS)
    one = decompose(b, GroupPartition.single(C1_IDS))
    assert one.between == 0.0 and abs(one.within - one.overall) <= 1e-12
    single = decompose(b, GroupPartition.singletons(C1_IDS))
    assert single.within == 0.0 and abs(single.between - single.overall) <= 1e-12


def test_share_extremes():
    ids = tuple(range(8))
    part = GroupPartition({"a": {0, 1, 2, 3}, "b": {4, 5, 6, 7}})
    top = BenefitVector(np.array([1, 1, 1, 1, 0, 0, 0, 0], float), ids)
    assert between_group_share(top, part) == 1.0
    half = BenefitVector(np.array([1, 1, 0, 0, 1, 1, 0, 0], float), ids)
    assert between_group_share(half, part) == 0.0
    with pytest.raises(UndefinedShareError):
        between_group_share(BenefitVector(np.ones(8), ids), part)


# -- error paths ------------------------------------------------------------

@pytest.mark.parametrize("bad, err", [
    ([], UndefinedIndexError),
    ([0, 0], UndefinedIndexError),
    ([1, -1], DomainError),
    ([1, float("nan")], DomainError),
])
def test_benefit_vector_validation(bad, err):
    with pytest.raises(err):
        BenefitVector(np.array(bad, float))


def test_alpha_limits_redirect():
    with pytest.raises(DomainError, match="theil"):
        generalized_entropy([1, 2], 1)
    with pytest.raises(DomainError, match="mean_log_deviation"):
        generalized_entropy([1, 2], 0)


def test_zero_benefit_fractional_alpha():
    with pytest.raises(DomainError):
        generalized_entropy([0, 1, 2], 0.5)
    assert generalized_entropy([0, 1, 2], 2) > 0


def test_decompose_partition_mismatch():
    b = BenefitVector(np.array([1.0, 2.0, 3.0]), ("a", "b", "c"))
    with pytest.raises(StructuralError):
        decompose(b, {"g": {"a", "b"}})
    with pytest.raises(StructuralError):
        decompose(b, {"g": {"a", "b", "c", "d"}})
    with pytest.raises(StructuralError):
        decompose(b, {"g": {"a", "b"}, "h": {"b", "c"}})
    with pytest.raises(StructuralError):
        decompose(b, {"g": {"a", "b", "c"}, "h": set()})


def test_all_zero_group_contributes_nothing():
    b = BenefitVector(np.array([0.0, 0.0, 1.0, 3.0]), (0, 1, 2, 3))
    d = decompose(b, {"z": {0, 1}, "p": {2, 3}})
    assert d.term("z").within == 0.0
    assert rel(d.between + d.within, d.overall) <= 1e-9


def test_weights_match_replication():
    vals, w = [1.0, 2.0, 5.0], [2, 1, 3]
    rep = np.repeat(vals, w)
    for a in (0.5, 2, 3):
        assert rel(generalized_entropy(vals, a, weights=w), generalized_entropy(rep, a)) <= 1e-12
    assert rel(theil(vals, weights=w), theil(rep)) <= 1e-12
    assert rel(coefficient_of_variation(vals, weights=w), coefficient_of_variation(rep)) <= 1e-12


def test_gini_not_decomposable():
    # Gini of the group-mean vector plus the mean-share-weighted group Ginis
    # misses the overlap term when the groups' ranges overlap.
    b = np.array([1.0, 3.0, 2.0, 4.0])
    groups = [b[:2], b[2:]]
    mu = b.mean()
    between = gini(np.repeat([g.mean() for g in groups], 2))
    within = sum(0.5 * (g.mean() / mu) * gini(g) for g in groups)
    assert abs(between + within - gini(b)) > 1e-2


# -- properties ---------------------------------------------------------------

benefits = st.lists(st.one_of(st.just(0.0), st.floats(1e-3, 10.0)), min_size=1, max_size=40).filter(
    lambda v: sum(v) > 1e-6
)
positive = st.lists(st.floats(0.1, 10.0, allow_nan=False), min_size=2, max_size=40)
alphas = st.sampled_from([2.0, 3.0, 1.5, -1.0])


@settings(max_examples=500, deadline=None)
@given(benefits, alphas, st.randoms(use_true_random=False))
def test_anonymity(b, alpha, rnd):
    perm = list(b)
    rnd.shuffle(perm)
    if alpha < 1 and min(b) == 0:
        return
    assert rel(generalized_entropy(perm, alpha), generalized_entropy(b, alpha)) <= 1e-12
    assert rel(theil(perm), theil(b)) <= 1e-12
    assert rel(gini(perm), gini(b)) <= 1e-12


@settings(max_examples=500, deadline=None)
@given(positive, st.sampled_from([0.5, 2.0, 3.0]), st.integers(1, 5))
def test_population_invariance(b, alpha, k):
    rep = list(b) * k
    assert rel(generalized_entropy(rep, alpha), generalized_entropy(b, alpha)) <= 1e-9
    assert rel(theil(rep), theil(b)) <= 1e-9
    assert rel(mean_log_deviation(rep), mean_log_deviation(b)) <= 1e-9


@settings(max_examples=500, deadline=None)
@given(positive, st.sampled_from([0.5, 2.0, 3.0]), st.data())
def test_transfer_principle(b, alpha, data):
    b = np.array(b)
    i, j = int(np.argmin(b)), int(np.argmax(b))
    gap = b[j] - b[i]
    if gap < 1e-3:
        return
    delta = data.draw(st.floats(gap * 0.01, gap * 0.49))
    moved = b.copy()
    moved[i] += delta
    moved[j] -= delta
    assert generalized_entropy(moved, alpha) < generalized_entropy(b, alpha)
    assert theil(moved) < theil(b)


@settings(max_examples=500, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(1, 50), st.sampled_from([0.5, 2.0, 3.0]))
def test_zero_normalization(c, n, alpha):
    assert generalized_entropy([c] * n, alpha) == 0.0
    assert theil([c] * n) == 0.0


@settings(max_examples=500, deadline=None)
@given(positive, st.floats(1e-3, 1e3), st.sampled_from([0.5, 2.0, 3.0]))
def test_scale_invariance(b, c, alpha):
    scaled = [c * v for v in b]
    assert rel(generalized_entropy(scaled, alpha), generalized_entropy(b, alpha)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(benefits)
def test_ge2_is_half_cv_squared(b):
    assert rel(generalized_entropy(b, 2), coefficient_of_variation(b) ** 2 / 2) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(positive)
def test_limit_consistency(b):
    assert abs(generalized_entropy(b, 1 + 1e-6) - theil(b)) <= 1e-4
    assert abs(generalized_entropy(b, 1e-6) - mean_log_deviation(b)) <= 1e-4


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.floats(0.0, 5.0), st.integers(0, 4)), min_size=1, max_size=60),
       st.sampled_from([0.5, 2.0, 3.0]))
def test_decomposition_identity(rows, alpha):
    vals = np.array([v for v, _ in rows])
    if vals.sum() <= 1e-6 or (alpha < 1 and vals.min() == 0):
        return
    groups = {}
    for i, (_, g) in enumerate(rows):
        groups.setdefault(g, set()).add(i)
    d = decompose(BenefitVector(vals, tuple(range(len(rows)))), groups, alpha)
    assert d.between >= 0 and d.within >= 0
    assert rel(d.between + d.within, d.overall) <= 1e-9
