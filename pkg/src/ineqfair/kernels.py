"""Numeric inner loops.

Every kernel has two implementations with identical signatures:

* ``*_nb`` -- explicit loops compiled with numba (when installed), and
* ``*_np`` -- vectorised numpy.

The public names (without suffix) dispatch on :data:`ineqfair._accel.USE_NUMBA`.
Inputs are assumed validated by the callers; kernels do no checking.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# group decomposition of the generalized entropy index
# ---------------------------------------------------------------------------

def group_decompose_np(values, labels, n_groups, alpha):
    n = values.shape[0]
    mu = values.mean()
    c = n * alpha * (alpha - 1.0)
    sizes = np.bincount(labels, minlength=n_groups).astype(np.float64)
    sums = np.bincount(labels, weights=values, minlength=n_groups)
    means = sums / sizes
    rel = (means / mu) ** alpha
    between = sizes * (rel - 1.0) / c
    powsum = np.bincount(labels, weights=(values / mu) ** alpha, minlength=n_groups)
    within = (powsum - sizes * rel) / c
    return sizes, means, within, between


@njit
def _power(x, alpha):
    # generic pow is several times slower than multiplication for the usual small integer alphas
    if alpha == 2.0:
        return x * x
    if alpha == 3.0:
        return x * x * x
    return x ** alpha


@njit
def group_decompose_nb(values, labels, n_groups, alpha):
    n = values.shape[0]
    mu = 0.0
    for i in range(n):
        mu += values[i]
    mu /= n
    c = n * alpha * (alpha - 1.0)
    sizes = np.zeros(n_groups)
    sums = np.zeros(n_groups)
    powsum = np.zeros(n_groups)
    for i in range(n):
        g = labels[i]
        sizes[g] += 1.0
        sums[g] += values[i]
        powsum[g] += _power(values[i] / mu, alpha)
    means = np.empty(n_groups)
    within = np.empty(n_groups)
    between = np.empty(n_groups)
    for g in range(n_groups):
        means[g] = sums[g] / sizes[g]
        rel = _power(means[g] / mu, alpha)
        between[g] = sizes[g] * (rel - 1.0) / c
        within[g] = (powsum[g] - sizes[g] * rel) / c
    return sizes, means, within, between


# ---------------------------------------------------------------------------
# exhaustive enumeration of cell labelings
# ---------------------------------------------------------------------------
#
# ``cell[i]`` is the feature cell of individual i; a classifier is one bit per
# cell, so mask m labels individual i with bit cell[i] of m.  Benefits follow
# b = yhat - y + 1.  Returns, per mask: 0-1 loss, overall index, between and
# within components, and a validity flag (mean benefit > 0, and no zero
# benefit when alpha < 1).

def enumerate_cells_np(y, cell, group, n_cells, n_groups, alpha):
    n = y.shape[0]
    masks = np.arange(1 << n_cells, dtype=np.int64)
    yhat = (masks[:, None] >> cell[None, :].astype(np.int64)) & 1
    b = (yhat - y[None, :] + 1).astype(np.float64)
    loss = (yhat != y[None, :]).sum(axis=1).astype(np.int64)
    onehot = np.zeros((n, n_groups))
    onehot[np.arange(n), group] = 1.0
    sizes = onehot.sum(axis=0)
    total = b.sum(axis=1)
    valid = total > 0
    if alpha < 1.0:
        valid &= (b > 0).all(axis=1)
    mu = np.where(valid, total / n, 1.0)
    c = n * alpha * (alpha - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        powb = np.where(b > 0, b, 0.0) ** alpha
    powb = np.where(b > 0, powb, 0.0)
    mu_a = mu ** alpha
    overall = (powb.sum(axis=1) / mu_a - n) / c
    gsum = b @ onehot
    gpow = powb @ onehot
    rel = (gsum / sizes[None, :] / mu[:, None]) ** alpha
    between = (sizes[None, :] * (rel - 1.0)).sum(axis=1) / c
    within = (gpow / mu_a[:, None] - sizes[None, :] * rel).sum(axis=1) / c
    overall = np.where(valid, overall, np.nan)
    between = np.where(valid, between, np.nan)
    within = np.where(valid, within, np.nan)
    return loss, overall, between, within, valid


@njit
def enumerate_cells_nb(y, cell, group, n_cells, n_groups, alpha):
    n = y.shape[0]
    n_masks = 1 << n_cells
    loss = np.zeros(n_masks, dtype=np.int64)
    overall = np.full(n_masks, np.nan)
    between = np.full(n_masks, np.nan)
    within = np.full(n_masks, np.nan)
    valid = np.zeros(n_masks, dtype=np.bool_)
    sizes = np.zeros(n_groups)
    for i in range(n):
        sizes[group[i]] += 1.0
    c = n * alpha * (alpha - 1.0)
    gsum = np.zeros(n_groups)
    gpow = np.zeros(n_groups)
    pow2 = 2.0 ** alpha
    for m in range(n_masks):
        gsum[:] = 0.0
        gpow[:] = 0.0
        total = 0.0
        errors = 0
        has_zero = False
        for i in range(n):
            yh = (m >> cell[i]) & 1
            bi = yh - y[i] + 1
            if yh != y[i]:
                errors += 1
            g = group[i]
            gsum[g] += bi
            total += bi
            if bi == 1:
                gpow[g] += 1.0
            elif bi == 2:
                gpow[g] += pow2
            else:
                has_zero = True
        loss[m] = errors
        if total <= 0.0 or (alpha < 1.0 and has_zero):
            continue
        valid[m] = True
        mu = total / n
        mu_a = _power(mu, alpha)
        pw = 0.0
        bt = 0.0
        wt = 0.0
        for g in range(n_groups):
            pw += gpow[g]
            rel = _power(gsum[g] / sizes[g] / mu, alpha)
            bt += sizes[g] * (rel - 1.0)
            wt += gpow[g] / mu_a - sizes[g] * rel
        overall[m] = (pw / mu_a - n) / c
        between[m] = bt / c
        within[m] = wt / c
    return loss, overall, between, within, valid


if USE_NUMBA:
    group_decompose = group_decompose_nb
    enumerate_cells = enumerate_cells_nb
else:
    group_decompose = group_decompose_np
    enumerate_cells = enumerate_cells_np

BACKEND = "numba" if USE_NUMBA else "numpy"
