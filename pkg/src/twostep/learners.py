"""Surrogate minimisers and synthetic data generators.

Tabular fits minimise the empirical surrogate risk separately for every point
of a finite domain. Linear fits minimise a regularised empirical risk over
f(x) = w0 + w.x with deterministic full-batch optimisers: gradient descent
with backtracking for logistic and squared loss, averaged projected
subgradient descent with step 1/(reg*t) for hinge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .errors import DimensionMismatch, EmptySample, InvalidParam, NonFiniteLoss
from .exact_oracle import DiscreteModel, random_model
from .proper_loss import MarginLoss, ProperLoss, builtin_loss

DEFAULT_REG = {"logistic": 1e-6, "squared": 1e-6, "hinge": 1e-2}
LINEAR_LOSSES = tuple(DEFAULT_REG)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# --------------------------------------------------------------------------
# tabular


@dataclass(frozen=True)
class TabularFit:
    scores: np.ndarray
    eta_hat: np.ndarray
    counts: np.ndarray


def fit_tabular(xs, ys, loss: ProperLoss | MarginLoss, domain_size: int) -> TabularFit:
    """Per-point empirical surrogate minimiser.

    Proper losses give link(eta_hat) with eta_hat clamped to
    [1/(2n_i+2), 1-1/(2n_i+2)]; hinge gives sgn(2 eta_hat - 1) with -1 at a
    tie. Points never observed back off to the global empirical prior
    (proper) or -1 (hinge).
    """
    xs = np.asarray(xs, dtype=np.int64).ravel()
    ys = np.asarray(ys).ravel()
    if xs.size == 0:
        raise EmptySample("no training samples")
    if xs.shape != ys.shape:
        raise DimensionMismatch(f"{xs.size} inputs vs {ys.size} labels")
    if xs.min() < 0 or xs.max() >= domain_size:
        raise InvalidParam(f"x-indices must lie in [0, {domain_size})")
    counts = np.bincount(xs, minlength=domain_size)
    positives = np.bincount(xs, weights=(ys == 1).astype(float), minlength=domain_size)
    prior = positives.sum() / xs.size
    seen = counts > 0
    eta_hat = np.where(seen, positives / np.maximum(counts, 1), prior)
    if isinstance(loss, MarginLoss):
        scores = np.where(seen & (2.0 * eta_hat - 1.0 > 0), 1.0, -1.0)
    else:
        n_eff = np.where(seen, counts, xs.size)
        eps = 1.0 / (2.0 * n_eff + 2.0)
        scores = loss.link(np.clip(eta_hat, eps, 1.0 - eps))
    return TabularFit(scores=scores, eta_hat=eta_hat, counts=counts)


# --------------------------------------------------------------------------
# synthetic generators


def generate_discrete(size: int, seed) -> DiscreteModel:
    return random_model(size, _rng(seed))


def sample_from(model: DiscreteModel, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw x ~ Pr(x), then y ~ Bernoulli(eta(x)) mapped to {-1, +1}."""
    if n < 1:
        raise InvalidParam(f"n must be >= 1, got {n}")
    rng = _rng(seed)
    xs = rng.choice(model.size, size=n, p=model.probs)
    ys = np.where(rng.random(n) < model.etas[xs], 1, -1).astype(np.int8)
    return xs, ys


@dataclass(frozen=True)
class LogisticModel:
    """eta(x) = sigmoid(a0 + a.x) with x standard Gaussian."""

    weights: np.ndarray
    intercept: float

    @property
    def dim(self) -> int:
        return self.weights.size

    def eta(self, X) -> np.ndarray:
        return expit(self.intercept + np.asarray(X) @ self.weights)

    def sample(self, n: int, seed) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rng = _rng(seed)
        X = rng.standard_normal((n, self.dim))
        eta = self.eta(X)
        y = np.where(rng.random(n) < eta, 1, -1).astype(np.int8)
        return X, y, eta


def generate_logistic_model(d: int = 2, seed=0) -> LogisticModel:
    if d < 1:
        raise InvalidParam(f"d must be >= 1, got {d}")
    rng = _rng(seed)
    a = rng.standard_normal(d)
    a0 = float(rng.standard_normal())
    return LogisticModel(a, a0)


# --------------------------------------------------------------------------
# linear models


@dataclass(frozen=True)
class TrainConfig:
    max_iters: int = 1000
    learning_rate: float = 1.0
    reg: float | None = None
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidParam("max_iters must be positive")
        if self.learning_rate <= 0:
            raise InvalidParam("learning_rate must be positive")
        if self.reg is not None and self.reg < 0:
            raise InvalidParam("reg must be non-negative")

    def reg_for(self, loss: str) -> float:
        return DEFAULT_REG[loss] if self.reg is None else self.reg


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float

    def decision(self, X) -> np.ndarray:
        return np.asarray(X @ self.weights).ravel() + self.intercept


def _check_xy(X, y):
    y = np.asarray(y).ravel()
    n = X.shape[0]
    if n < 1:
        raise EmptySample("no training rows")
    if y.size != n:
        raise DimensionMismatch(f"{n} rows vs {y.size} labels")
    if not np.all(np.isin(y, (-1, 1))):
        raise InvalidParam("labels must be -1 or +1")
    return y.astype(float)


def _as_matrix(X):
    if sp.issparse(X):
        X = X.tocsr()
        values = X.data
    else:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        values = X
    if not np.all(np.isfinite(values)):
        raise InvalidParam("features must be finite")
    return X


def objective(params: np.ndarray, X, y, loss: str, reg: float) -> float:
    """Regularised empirical risk; params = [w0, w1, ..., wd].

    The intercept is penalised only for hinge, where the step-size scheme
    needs strong convexity in every coordinate.
    """
    w0, w = params[0], params[1:]
    f = np.asarray(X @ w).ravel() + w0
    m = y * f
    if loss == "logistic":
        risk = np.mean(np.logaddexp(0.0, -m))
    elif loss == "squared":
        risk = np.mean((y - f) ** 2)
    elif loss == "hinge":
        risk = np.mean(np.maximum(0.0, 1.0 - m))
        return float(risk + 0.5 * reg * (w @ w + w0 * w0))
    else:
        raise InvalidParam(f"no linear trainer for loss {loss!r}")
    return float(risk + 0.5 * reg * (w @ w))


def gradient(params: np.ndarray, X, y, loss: str, reg: float) -> np.ndarray:
    """Gradient of ``objective`` (a subgradient for hinge)."""
    w0, w = params[0], params[1:]
    f = np.asarray(X @ w).ravel() + w0
    n = y.size
    if loss == "logistic":
        dloss = -y * expit(-y * f)
    elif loss == "squared":
        dloss = 2.0 * (f - y)
    elif loss == "hinge":
        dloss = np.where(y * f < 1.0, -y, 0.0)
    else:
        raise InvalidParam(f"no linear trainer for loss {loss!r}")
    g = np.empty_like(params)
    g[0] = dloss.sum() / n
    g[1:] = np.asarray(X.T @ dloss).ravel() / n + reg * w
    if loss == "hinge":
        g[0] += reg * w0
    return g


def _gradient_descent(X, y, loss, reg, cfg: TrainConfig) -> np.ndarray:
    p = np.zeros(X.shape[1] + 1)
    obj = objective(p, X, y, loss, reg)
    if not math.isfinite(obj):
        raise NonFiniteLoss(f"{loss} objective is not finite at the origin")
    for _ in range(cfg.max_iters):
        g = gradient(p, X, y, loss, reg)
        gg = float(g @ g)
        if math.sqrt(gg) < cfg.tol:
            break
        step = cfg.learning_rate
        while True:
            cand = p - step * g
            new = objective(cand, X, y, loss, reg)
            if math.isfinite(new) and new <= obj - 0.5 * step * gg:
                break
            step *= 0.5
            if step < 1e-20:
                # No sufficient decrease is representable any more.
                return p
        p, obj = cand, new
    return p


def _averaged_subgradient(X, y, reg, cfg: TrainConfig) -> np.ndarray:
    if reg <= 0:
        raise InvalidParam("hinge training needs reg > 0")
    d = X.shape[1] + 1
    p = np.zeros(d)
    radius = 1.0 / math.sqrt(reg)
    avg = np.zeros(d)
    start = cfg.max_iters // 2
    for t in range(1, cfg.max_iters + 1):
        g = gradient(p, X, y, "hinge", reg)
        p = p - g / (reg * t)
        norm = math.sqrt(float(p @ p))
        if norm > radius:
            p *= radius / norm
        if t > start:
            avg += (p - avg) / (t - start)
    zero = np.zeros(d)
    if objective(avg, X, y, "hinge", reg) > objective(zero, X, y, "hinge", reg):
        return zero
    return avg


def fit_linear(X, y, loss: str, cfg: TrainConfig | None = None) -> LinearModel:
    cfg = cfg or TrainConfig()
    name = loss if isinstance(loss, str) else loss.name
    builtin_loss(name)
    if name not in LINEAR_LOSSES:
        raise InvalidParam(f"no linear trainer for loss {name!r}")
    X = _as_matrix(X)
    y = _check_xy(X, y)
    reg = cfg.reg_for(name)
    if name == "hinge":
        p = _averaged_subgradient(X, y, reg, cfg)
    else:
        p = _gradient_descent(X, y, name, reg, cfg)
    if not np.all(np.isfinite(p)):
        raise NonFiniteLoss(f"{name} fit produced non-finite weights")
    return LinearModel(weights=p[1:].copy(), intercept=float(p[0]))

