"""Linear-fractional performance metrics of (FP, FN).

A metric has the form

    Psi(FP, FN) = (a0 + a1*FP + a2*FN) / (b0 + b1*FP + b2*FN)

where the coefficients of the built-in metrics depend on the positive-class
prior P. ``FractionalMetric`` remembers how it was built so it can be
re-instantiated at another prior (``at_prior``), which is how the empirical
prior of a validation sample gets plugged in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateDenominator,
    InvalidParam,
    NonPositiveGamma,
    UnknownMetric,
)

DENOMINATOR_EPS = 1e-12
_MONOTONE_SLACK = 1e-12
_BOX_TOL = 1e-12
_D_GRID_STEP = 0.01

BUILTIN_METRICS = ("accuracy", "f-beta", "jaccard", "am", "weighted", "custom")


@dataclass(frozen=True)
class ConfusionRates:
    """False-positive mass, false-negative mass and positive prior."""

    fp: float
    fn_: float
    prior: float

    def __post_init__(self):
        p = self.prior
        if not (-_BOX_TOL <= p <= 1 + _BOX_TOL):
            raise InvalidParam(f"prior {p} outside [0, 1]")
        if not (-_BOX_TOL <= self.fp <= 1 - p + _BOX_TOL):
            raise InvalidParam(f"fp={self.fp} outside [0, 1-P] for P={p}")
        if not (-_BOX_TOL <= self.fn_ <= p + _BOX_TOL):
            raise InvalidParam(f"fn={self.fn_} outside [0, P] for P={p}")


@dataclass(frozen=True)
class FractionalMetric:
    name: str
    a0: float
    a1: float
    a2: float
    b0: float
    b1: float
    b2: float
    prior: float
    kind: str = "custom"
    params: tuple[float, ...] = field(default=())

    @property
    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        return (self.a0, self.a1, self.a2, self.b0, self.b1, self.b2)

    def numerator(self, fp, fn):
        return self.a0 + self.a1 * fp + self.a2 * fn

    def denominator(self, fp, fn):
        return self.b0 + self.b1 * fp + self.b2 * fn

    def values(self, fp, fn) -> np.ndarray:
        """Vectorised evaluation; degenerate denominators map to -inf."""
        fp = np.asarray(fp, dtype=float)
        fn = np.asarray(fn, dtype=float)
        num = self.numerator(fp, fn)
        den = self.denominator(fp, fn)
        ok = np.abs(den) > DENOMINATOR_EPS
        out = np.full(np.broadcast(fp, fn).shape, -np.inf)
        np.divide(num, den, out=out, where=ok)
        return out

    def at_prior(self, prior: float, check: bool = False) -> "FractionalMetric":
        """Rebuild with a different prior. Custom metrics are returned as is."""
        if self.kind == "custom":
            return self
        if prior == self.prior:
            return self
        return _build(self.kind, float(prior), self.params, check=check)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class MetricConstants:
    gamma: float
    cee: float
    alpha: float
    d_bound: float


def evaluate(metric: FractionalMetric, rates: ConfusionRates) -> float:
    den = metric.denominator(rates.fp, rates.fn_)
    if abs(den) <= DENOMINATOR_EPS:
        raise DegenerateDenominator(
            f"{metric.name}: denominator {den!r} at fp={rates.fp}, fn={rates.fn_}"
        )
    return metric.numerator(rates.fp, rates.fn_) / den


def builtin(name: str, prior: float, params: Sequence[float] | None = None) -> FractionalMetric:
    """Coefficient form of accuracy, F-beta, Jaccard, AM, weighted accuracy
    or a custom six-coefficient metric, validated over the feasible box."""
    if name not in BUILTIN_METRICS:
        raise UnknownMetric(f"unknown metric {name!r}; choose from {BUILTIN_METRICS}")
    if name != "custom" and not (0.0 < prior < 1.0):
        raise InvalidParam(f"prior must lie in (0, 1), got {prior}")
    return _build(name, float(prior), tuple(float(v) for v in (params or ())), check=True)


def _build(kind: str, prior: float, params: tuple[float, ...], check: bool) -> FractionalMetric:
    p = prior
    if kind == "accuracy":
        _expect_params(kind, params, 0)
        coef = (1.0, -1.0, -1.0, 1.0, 0.0, 0.0)
        name = "accuracy"
    elif kind == "f-beta":
        params = params or (1.0,)
        _expect_params(kind, params, 1)
        (beta,) = params
        if not beta > 0:
            raise InvalidParam(f"beta must be positive, got {beta}")
        k = 1.0 + beta * beta
        coef = (k * p, 0.0, -k, k * p, 1.0, -1.0)
        name = f"f-beta:{beta:g}"
    elif kind == "jaccard":
        _expect_params(kind, params, 0)
        coef = (p, 0.0, -1.0, p, 1.0, 0.0)
        name = "jaccard"
    elif kind == "am":
        _expect_params(kind, params, 0)
        q = 2.0 * p * (1.0 - p)
        coef = (q, -p, -(1.0 - p), q, 0.0, 0.0)
        name = "am"
    elif kind == "weighted":
        _expect_params(kind, params, 2)
        w1, w2 = params
        if not (w1 > 0 and w2 > 0):
            raise InvalidParam(f"weights must be positive, got {params}")
        base = w1 * (1.0 - p) + w2 * p
        coef = (base, -w1, -w2, base, 0.0, 0.0)
        name = f"weighted:{w1:g},{w2:g}"
    elif kind == "custom":
        _expect_params(kind, params, 6)
        coef = params
        name = "custom:" + ",".join(f"{c:g}" for c in params)
    else:
        raise UnknownMetric(kind)
    if not all(math.isfinite(c) for c in coef):
        raise InvalidParam(f"non-finite coefficients for {name}")
    metric = FractionalMetric(name, *coef, prior=p, kind=kind, params=params)
    if check:
        _check_feasible(metric)
    return metric


def _expect_params(kind, params, count):
    if len(params) != count:
        raise InvalidParam(f"{kind} takes {count} parameter(s), got {len(params)}")


def _box_corners(prior: float) -> tuple[np.ndarray, np.ndarray]:
    fp = np.array([0.0, 1.0 - prior, 0.0, 1.0 - prior])
    fn = np.array([0.0, 0.0, prior, prior])
    return fp, fn


def _check_feasible(metric: FractionalMetric) -> None:
    a0, a1, a2, b0, b1, b2 = metric.coefficients
    fp, fn = _box_corners(metric.prior)
    den = metric.denominator(fp, fn)
    if np.min(den) <= DENOMINATOR_EPS:
        raise NonPositiveGamma(
            f"{metric.name}: denominator not bounded away from zero at P={metric.prior}"
        )
    # Numerators of dPsi/dFP and dPsi/dFN are affine in one variable each,
    # so checking the corners covers the whole box.
    d_fp = (a1 * b0 - b1 * a0) + (a1 * b2 - b1 * a2) * fn
    d_fn = (a2 * b0 - b2 * a0) + (a2 * b1 - b2 * a1) * fp
    # Slack scales with the coefficients since the products above carry roundoff.
    slack = _MONOTONE_SLACK * max(1.0, max(abs(c) for c in metric.coefficients) ** 2)
    if np.max(d_fp) > slack or np.max(d_fn) > slack:
        raise InvalidParam(f"{metric.name} is not non-increasing in FP and FN")


def gamma_of(metric: FractionalMetric, prior: float | None = None) -> float:
    """Lower bound of the denominator over the feasible (FP, FN) box."""
    if prior is not None:
        metric = metric.at_prior(prior)
    p = metric.prior
    kind = metric.kind
    if kind == "accuracy":
        g = 1.0
    elif kind == "f-beta":
        g = metric.params[0] ** 2 * p
    elif kind == "jaccard":
        g = p
    elif kind == "am":
        g = 2.0 * p * (1.0 - p)
    elif kind == "weighted":
        w1, w2 = metric.params
        g = w1 * (1.0 - p) + w2 * p
    else:
        fp, fn = _box_corners(p)
        g = float(np.min(metric.denominator(fp, fn)))
    if not g > 0:
        raise NonPositiveGamma(f"{metric.name}: gamma={g} at P={p}")
    return g


def _d_bound(metric: FractionalMetric) -> float:
    p = metric.prior
    fp = np.union1d(np.arange(0.0, 1.0 - p, _D_GRID_STEP), [1.0 - p])
    fn = np.union1d(np.arange(0.0, p, _D_GRID_STEP), [p])
    FP, FN = np.meshgrid(fp, fn)
    psi = metric.values(FP, FN)
    psi = psi[np.isfinite(psi)]
    d1 = np.max(np.abs(metric.b1 * psi - metric.a1))
    d2 = np.max(np.abs(metric.b2 * psi - metric.a2))
    return float(max(d1, d2))


def optimal_threshold_eta(metric: FractionalMetric, psi_star: float) -> float:
    """Optimal threshold on the conditional-probability scale.

    Equals (Psi* b1 - a1) / (Psi* (b1 + b2) - (a1 + a2)); it is also the
    cost ``alpha`` of the matching cost-sensitive problem.
    """
    a0, a1, a2, b0, b1, b2 = metric.coefficients
    top = psi_star * b1 - a1
    bottom = psi_star * (b1 + b2) - (a1 + a2)
    if not bottom > 0:
        raise NonPositiveGamma(f"{metric.name}: non-positive cost normaliser {bottom}")
    return top / bottom


def constants(
    metric: FractionalMetric, psi_star: float, prior: float | None = None
) -> MetricConstants:
    if prior is not None:
        metric = metric.at_prior(prior, check=True)
    gamma = gamma_of(metric)
    a1, a2, b1, b2 = metric.a1, metric.a2, metric.b1, metric.b2
    cee = (psi_star * (b1 + b2) - (a1 + a2)) / gamma
    alpha = optimal_threshold_eta(metric, psi_star)
    return MetricConstants(gamma=gamma, cee=cee, alpha=alpha, d_bound=_d_bound(metric))


def cost_sensitive_risk(rates: ConfusionRates, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParam(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * rates.fp + (1.0 - alpha) * rates.fn_


def parse_metric(text: str, prior: float = 0.5) -> FractionalMetric:
    """Parse ``accuracy | f-beta:B | jaccard | am | weighted:W1,W2 |
    custom:A0,A1,A2,B0,B1,B2`` into a metric at ``prior``."""
    name, _, rest = text.strip().partition(":")
    name = name.lower()
    if name in ("f1", "f-measure"):
        name, rest = "f-beta", rest or "1"
    try:
        params = [float(v) for v in rest.split(",")] if rest else []
    except ValueError:
        raise InvalidParam(f"bad metric parameters in {text!r}") from None
    return builtin(name, prior, params)
