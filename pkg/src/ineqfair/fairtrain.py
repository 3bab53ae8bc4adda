"""Logistic regression under a bound on the false-negative covariance.

The sensitive attribute is binarised (reference category vs. the rest) and,
over ground-truth positives, its covariance with the misclassification
distance ``min(0, response)`` is bounded by ``factor * c0`` where ``c0`` is
that covariance for the unconstrained model.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, ConstrainedTrainingFailed, DegenerateDataError
from .model import LinearModel, logistic_loss, train_logistic
from scipy.special import expit

log = logging.getLogger(__name__)

SLACK_TOL = 1e-4


@dataclass(frozen=True)
class ConstraintSpec:
    attribute: str
    reference: str
    factors: tuple = tuple(round(1.0 - 0.05 * k, 10) for k in range(21))
    target: str = "FNR"

    def __post_init__(self):
        factors = tuple(float(f) for f in self.factors)
        if not factors:
            raise ConfigError("factor grid is empty")
        if any(not 0.0 <= f <= 1.0 for f in factors):
            raise ConfigError("covariance factors must lie in [0, 1]")
        if self.target.upper() != "FNR":
            raise ConfigError("only the FNR covariance constraint is supported")
        object.__setattr__(self, "factors", factors)

    def binarize(self, values) -> np.ndarray:
        """1 for members of the non-reference categories, 0 for the reference."""
        values = np.asarray(values).astype(str)
        if not np.any(values == str(self.reference)):
            raise ConfigError(f"reference category {self.reference!r} not present in {self.attribute!r}")
        return (values != str(self.reference)).astype(np.float64)

    def z(self, data) -> np.ndarray:
        try:
            return self.binarize(data.sensitive[self.attribute])
        except KeyError:
            raise ConfigError(f"dataset has no sensitive column {self.attribute!r}") from None


@dataclass(frozen=True)
class Hyperparams:
    l2: float = 1e-4
    max_iters: int = 10000
    tol: float = 1e-8
    slack_tol: float = SLACK_TOL
    lambda_start: float = 1.0
    lambda_growth: float = 10.0
    lambda_max: float = 1e14


def parse_factor_grid(text: str) -> tuple:
    """``"1.0:0.0:0.05"`` -> ``(1.0, 0.95, ..., 0.0)`` (inclusive)."""
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        try:
            return tuple(float(t) for t in text.split(","))
        except ValueError:
            raise ConfigError(f"bad factor grid {text!r}; expected start:stop:step") from None
    if step <= 0:
        raise ConfigError("factor step must be positive")
    count = int(round(abs(stop - start) / step)) + 1
    sign = 1.0 if stop >= start else -1.0
    return tuple(round(start + sign * step * k, 10) for k in range(count))


def _positives(data):
    y = np.asarray(data.labels)
    pos = y == 1
    if not np.any(pos):
        raise DegenerateDataError("no ground-truth positive rows")
    return pos


def fnr_cov(m: LinearModel, data, z) -> float:
    """Covariance of ``z`` with ``min(0, response)`` over rows with ``y = 1``."""
    pos = _positives(data)
    z = np.asarray(z, dtype=np.float64)
    d = np.minimum(0.0, m.response(data.features[pos]))
    zc = z[pos] - z[pos].mean()
    return float(np.mean(zc * d))


def group_fnr(m: LinearModel, data, z) -> dict:
    """False negative rate per binarised group (``response <= 0`` counts as negative)."""
    pos = _positives(data)
    z = np.asarray(z)
    neg = m.response(data.features) <= 0
    out = {}
    for g in (0, 1):
        sel = pos & (z == g)
        out[g] = float(neg[sel].mean()) if np.any(sel) else float("nan")
    return out


class _Problem:
    def __init__(self, data, z, l2):
        self.x = np.asarray(data.features, dtype=np.float64)
        self.y = np.asarray(data.labels, dtype=np.float64)
        pos = _positives(data)
        self.xp = self.x[pos]
        z = np.asarray(z, dtype=np.float64)[pos]
        self.zc = z - z.mean()
        self.l2 = l2

    def loss_grad(self, theta):
        w, b = theta[:-1], theta[-1]
        t = self.x @ w + b
        r = expit(t) - self.y
        n = self.y.size
        loss = np.mean(np.logaddexp(0.0, t) - self.y * t) + 0.5 * self.l2 * (w @ w)
        g = np.empty_like(theta)
        g[:-1] = self.x.T @ r / n + self.l2 * w
        g[-1] = r.sum() / n
        return loss, g

    def cov_grad(self, theta):
        w, b = theta[:-1], theta[-1]
        t = self.xp @ w + b
        neg = t < 0
        cov = np.mean(self.zc * np.where(neg, t, 0.0))
        coef = np.where(neg, self.zc, 0.0) / t.size
        g = np.empty_like(theta)
        g[:-1] = self.xp.T @ coef
        g[-1] = coef.sum()
        return cov, g

    def penalized(self, theta, lam, bound):
        loss, g = self.loss_grad(theta)
        cov, gc = self.cov_grad(theta)
        excess = abs(cov) - bound
        if excess > 0:
            loss += lam * excess * excess
            g = g + 2.0 * lam * excess * np.sign(cov) * gc
        return loss, g


def _solve(problem, theta0, bound, hp: Hyperparams):
    theta = np.array(theta0, dtype=np.float64)
    lam = hp.lambda_start
    trace = []
    while lam <= hp.lambda_max:
        res = minimize(problem.penalized, theta, args=(lam, bound), jac=True, method="L-BFGS-B",
                       options={"maxiter": hp.max_iters, "gtol": 1e-10, "ftol": 1e-15})
        theta = res.x
        cov, _ = problem.cov_grad(theta)
        trace.append((lam, float(cov)))
        if abs(cov) <= bound + hp.slack_tol:
            return theta, trace
        lam *= hp.lambda_growth
    raise ConstrainedTrainingFailed(
        f"|cov| stayed above {bound:.3g} + {hp.slack_tol:g} after multiplier search",
        {"bound": bound, "trace": trace},
    )


def train_constrained(data, spec: ConstraintSpec, factor: float, hyperparams: Hyperparams | None = None,
                      *, unconstrained: LinearModel | None = None, warm_start: LinearModel | None = None) -> LinearModel:
    """Minimise logistic loss subject to ``|fnr_cov| <= factor * c0``.

    ``factor=1`` (or any bound the unconstrained model already meets)
    returns the unconstrained model itself.
    """
    hp = hyperparams or Hyperparams()
    if not 0.0 <= factor <= 1.0:
        raise ConfigError(f"factor must lie in [0, 1], got {factor!r}")
    z = spec.z(data)
    base = unconstrained or train_logistic(data, hp.l2, hp.max_iters, hp.tol)
    c0 = abs(fnr_cov(base, data, z))
    bound = factor * c0
    if c0 <= bound + hp.slack_tol:
        return base
    problem = _Problem(data, z, hp.l2)
    start = warm_start or base
    theta0 = np.append(start.weights, start.intercept)
    theta, trace = _solve(problem, theta0, bound, hp)
    log.debug("factor %.3f bound %.3g multiplier trace %s", factor, bound, trace)
    return LinearModel(theta[:-1], theta[-1])


@dataclass
class ConstraintRow:
    factor: float
    loss: float
    fnr_cov: float
    group_fnr: dict
    model: LinearModel = field(repr=False)


def constraint_sweep(data, spec: ConstraintSpec, hyperparams: Hyperparams | None = None) -> list[ConstraintRow]:
    """Train one model per factor, warm-starting each from the previous one."""
    hp = hyperparams or Hyperparams()
    z = spec.z(data)
    x, y = data.features, data.labels.astype(np.float64)
    base = train_logistic(data, hp.l2, hp.max_iters, hp.tol)
    rows = []
    prev = None
    for f in spec.factors:
        try:
            m = train_constrained(data, spec, f, hp, unconstrained=base, warm_start=prev)
        except ConstrainedTrainingFailed as e:
            raise ConstrainedTrainingFailed(f"factor {f:g}: {e}", e.diagnostics) from e
        prev = m
        rows.append(ConstraintRow(
            factor=f,
            loss=logistic_loss(m.weights, m.intercept, x, y, hp.l2),
            fnr_cov=fnr_cov(m, data, z),
            group_fnr=group_fnr(m, data, z),
            model=m,
        ))
    return rows
