"""Logistic regression and the ranked-threshold decision rule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DegenerateDataError, DomainError, StructuralError


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float
    loss_history: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).ravel()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def n_features(self) -> int:
        return self.weights.size

    def response(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.shape[-1] != self.weights.size:
            raise StructuralError(f"model expects {self.weights.size} features, got {x.shape[-1]}")
        return x @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept}


@dataclass(frozen=True)
class RankingRule:
    tau: float
    tie_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"tau must lie in [0, 1], got {self.tau!r}")


def _features_labels(data):
    if isinstance(data, tuple):
        x, y = data
    else:
        x, y = data.features, data.labels
    return np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)


def logistic_loss(w, b, x, y, l2=0.0) -> float:
    """Mean logistic loss plus ``l2 * |w|^2 / 2`` (intercept unpenalised)."""
    z = x @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))


def _loss_grad(w, b, x, y, l2):
    z = x @ w + b
    r = expit(z) - y
    n = y.size
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w)
    return float(loss), x.T @ r / n + l2 * w, float(r.sum() / n)


def train_logistic(train, l2=1e-4, max_iters=10000, tol=1e-8) -> LinearModel:
    """Gradient descent with Armijo backtracking from the zero model.

    ``train`` is an :class:`~ineqfair.dataio.EncodedDataset` or an
    ``(features, labels)`` pair.  Stops when the gradient norm drops below
    ``tol`` or after ``max_iters`` iterations.
    """
    x, y = _features_labels(train)
    if y.size == 0:
        raise DegenerateDataError("training set is empty")
    if np.all(y == y[0]):
        raise DegenerateDataError("training labels contain a single class")
    w = np.zeros(x.shape[1])
    b = 0.0
    step = 1.0
    loss, gw, gb = _loss_grad(w, b, x, y, l2)
    history = [loss]
    for _ in range(max_iters):
        gnorm2 = float(gw @ gw + gb * gb)
        if np.sqrt(gnorm2) < tol:
            break
        step *= 2.0
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            new = logistic_loss(w_new, b_new, x, y, l2)
            if new <= loss - 0.5 * step * gnorm2 or step < 1e-16:
                break
            step *= 0.5
        if new > loss:
            break
        w, b = w_new, b_new
        loss, gw, gb = _loss_grad(w, b, x, y, l2)
        history.append(loss)
    return LinearModel(w, b, tuple(history))


def score(m: LinearModel, features) -> np.ndarray | float:
    """Positive-class probability: logistic of the linear response."""
    out = expit(m.response(features))
    return float(out) if np.ndim(out) == 0 else out


def predict(m: LinearModel, features) -> np.ndarray:
    return (m.response(features) > 0).astype(np.int64)


def oracle_scores(y) -> np.ndarray:
    y = np.asarray(y)
    if np.any((y != 0) & (y != 1)):
        raise DomainError("labels must be binary")
    return y.astype(np.float64)


def ranks(scores, tie_seed=0) -> np.ndarray:
    """0-based ascending rank; ties ordered by a seeded uniform permutation."""
    scores = np.asarray(scores, dtype=np.float64)
    rng = np.random.default_rng(tie_seed)
    order = np.lexsort((rng.permutation(scores.size), scores))
    r = np.empty(scores.size, dtype=np.int64)
    r[order] = np.arange(scores.size)
    return r


def accept_count(n: int, tau: float) -> int:
    """Number of individuals labelled 1 at threshold ``tau``."""
    k = n * tau
    nearest = round(k)
    if abs(k - nearest) < 1e-9:
        k = nearest
    return n - int(np.ceil(k))


def threshold_rank_predict(scores, rule: RankingRule | float, tie_seed=0) -> np.ndarray:
    """Label 1 iff ``rank(i) >= n * tau`` with ``rank`` counted from 0.

    ``tau=0`` accepts everyone, ``tau=1`` nobody.  With oracle scores and
    ``tau`` equal to the negative-class fraction the labels equal the truth.
    """
    if not isinstance(rule, RankingRule):
        rule = RankingRule(float(rule), tie_seed)
    scores = np.asarray(scores, dtype=np.float64)
    if np.any((scores < 0) | (scores > 1)):
        raise DomainError("scores must lie in [0, 1]")
    n = scores.size
    r = ranks(scores, rule.tie_seed)
    return (r >= n - accept_count(n, rule.tau)).astype(np.int64)


def accuracy(y, y_hat) -> float:
    y = np.asarray(y)
    y_hat = np.asarray(y_hat)
    if y.shape != y_hat.shape:
        raise StructuralError("label vectors differ in length")
    if y.size == 0:
        raise StructuralError("empty label vectors")
    return float(np.mean(y == y_hat))
