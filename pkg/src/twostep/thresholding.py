"""Empirical threshold tuning for binary, macro- and micro-averaged metrics.

A scorer f and a threshold theta give the classifier h(x) = +1 iff
f(x) > theta; a score exactly at theta is predicted negative. Candidate
thresholds are the midpoints between consecutive distinct scores plus one
sentinel below the minimum and one above the maximum, which covers every
labelling a threshold can induce on the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AllCandidatesDegenerate, DimensionMismatch, EmptySample, InvalidParam
from .fracmetric import ConfusionRates, FractionalMetric, MetricConstants


@dataclass(frozen=True)
class ScoredSample:
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float).ravel()
        labels = np.asarray(self.labels).ravel()
        if scores.shape != labels.shape:
            raise DimensionMismatch(f"{scores.size} scores vs {labels.size} labels")
        if scores.size == 0:
            raise EmptySample("scored sample is empty")
        if not np.all(np.isin(labels, (-1, 1))):
            raise InvalidParam("labels must be -1 or +1")
        if not np.all(np.isfinite(scores)):
            raise InvalidParam("scores must be finite")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels.astype(np.int8))

    @property
    def n(self) -> int:
        return self.scores.size

    @property
    def prior(self) -> float:
        return float(np.count_nonzero(self.labels == 1)) / self.n


@dataclass(frozen=True)
class TunedThreshold:
    theta: float
    metric_value: float
    candidates_evaluated: int


@dataclass(frozen=True)
class MultilabelScores:
    """m label columns over the same n instances."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        labels = np.asarray(self.labels)
        if scores.ndim == 1:
            scores = scores[:, None]
        if labels.ndim == 1:
            labels = labels[:, None]
        if scores.shape != labels.shape or scores.ndim != 2:
            raise DimensionMismatch(f"scores {scores.shape} vs labels {labels.shape}")
        if scores.shape[0] == 0 or scores.shape[1] == 0:
            raise EmptySample("need n >= 1 instances and m >= 1 labels")
        if not np.all(np.isin(labels, (-1, 1))):
            raise InvalidParam("labels must be -1 or +1")
        if not np.all(np.isfinite(scores)):
            raise InvalidParam("scores must be finite")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels.astype(np.int8))

    @property
    def m(self) -> int:
        return self.scores.shape[1]

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    def label(self, i: int) -> ScoredSample:
        return ScoredSample(self.scores[:, i], self.labels[:, i])

    @classmethod
    def from_samples(cls, samples: Sequence[ScoredSample]) -> "MultilabelScores":
        return cls(
            np.column_stack([s.scores for s in samples]),
            np.column_stack([s.labels for s in samples]),
        )


@dataclass(frozen=True)
class MacroTuned:
    per_label: tuple[TunedThreshold, ...]
    value: float


def empirical_rates(sample: ScoredSample, theta: float) -> ConfusionRates:
    pos = sample.scores > theta
    neg_label = sample.labels == -1
    n = sample.n
    fp = np.count_nonzero(pos & neg_label) / n
    fn = np.count_nonzero(~pos & ~neg_label) / n
    return ConfusionRates(fp=fp, fn_=fn, prior=sample.prior)


def candidate_thresholds(scores: np.ndarray) -> np.ndarray:
    """Sorted candidates: sentinel, midpoints of distinct scores, sentinel."""
    u = np.unique(scores)
    mids = u[:-1] + (u[1:] - u[:-1]) / 2.0
    # A midpoint may round up onto the upper score; fall back to the lower one.
    mids = np.where(mids >= u[1:], u[:-1], mids)
    lo = u[0] - 1.0
    hi = u[-1] + 1.0
    if not lo < u[0]:
        lo = np.nextafter(u[0], -np.inf)
    if not hi > u[-1]:
        hi = np.nextafter(u[-1], np.inf)
    return np.concatenate(([lo], mids, [hi]))


def _sweep_counts(scores, labels, thetas):
    """FP and FN counts at every theta, from one sort of each class."""
    neg_sorted = np.sort(scores[labels == -1])
    pos_sorted = np.sort(scores[labels == 1])
    fp = neg_sorted.size - np.searchsorted(neg_sorted, thetas, side="right")
    fn = np.searchsorted(pos_sorted, thetas, side="right")
    return fp, fn


def _argmax_first(values: np.ndarray) -> int:
    if not np.any(np.isfinite(values)):
        raise AllCandidatesDegenerate("no candidate threshold gives a defined metric value")
    return int(np.argmax(values))


def tune_threshold(sample: ScoredSample, metric: FractionalMetric) -> TunedThreshold:
    """Exhaustive sweep maximising the empirical metric; ties go to the smallest theta.

    Prior-dependent coefficients are re-instantiated at the sample prior.
    """
    thetas = candidate_thresholds(sample.scores)
    fp, fn = _sweep_counts(sample.scores, sample.labels, thetas)
    m = metric.at_prior(sample.prior)
    values = m.values(fp / sample.n, fn / sample.n)
    best = _argmax_first(values)
    return TunedThreshold(float(thetas[best]), float(values[best]), thetas.size)


def metric_at(sample: ScoredSample, metric: FractionalMetric, theta: float) -> float:
    """Empirical metric of the classifier thresholded at theta (-inf if undefined)."""
    r = empirical_rates(sample, theta)
    return float(metric.at_prior(r.prior).values(r.fp, r.fn_))


def tune_macro(scores: MultilabelScores, metric: FractionalMetric) -> MacroTuned:
    per_label = []
    for i in range(scores.m):
        try:
            per_label.append(tune_threshold(scores.label(i), metric))
        except AllCandidatesDegenerate as exc:
            raise AllCandidatesDegenerate(f"label {i}: {exc}") from exc
    value = sum(t.metric_value for t in per_label) / scores.m
    return MacroTuned(tuple(per_label), value)


def micro_rates(scores: MultilabelScores, theta: float) -> ConfusionRates:
    """FP, FN and prior averaged over labels at a shared threshold."""
    pos = scores.scores > theta
    neg_label = scores.labels == -1
    total = scores.n * scores.m
    return ConfusionRates(
        fp=np.count_nonzero(pos & neg_label) / total,
        fn_=np.count_nonzero(~pos & ~neg_label) / total,
        prior=np.count_nonzero(~neg_label) / total,
    )


def micro_value(scores: MultilabelScores, metric: FractionalMetric, theta: float) -> float:
    r = micro_rates(scores, theta)
    return float(metric.at_prior(r.prior).values(r.fp, r.fn_))


def macro_value(scores: MultilabelScores, metric: FractionalMetric, thetas: Sequence[float]) -> float:
    if len(thetas) != scores.m:
        raise DimensionMismatch(f"{len(thetas)} thresholds for {scores.m} labels")
    return sum(metric_at(scores.label(i), metric, t) for i, t in enumerate(thetas)) / scores.m


def tune_micro(scores: MultilabelScores, metric: FractionalMetric) -> TunedThreshold:
    """One threshold shared by all labels, maximising the metric of the
    label-averaged FP and FN. Candidates come from the pooled m*n scores."""
    flat_scores = scores.scores.ravel()
    flat_labels = scores.labels.ravel()
    total = flat_scores.size
    thetas = candidate_thresholds(flat_scores)
    fp, fn = _sweep_counts(flat_scores, flat_labels, thetas)
    prior = np.count_nonzero(flat_labels == 1) / total
    values = metric.at_prior(prior).values(fp / total, fn / total)
    best = _argmax_first(values)
    return TunedThreshold(float(thetas[best]), float(values[best]), thetas.size)


def tuning_bound(n: int, delta: float, consts: MetricConstants) -> float:
    """Extra regret paid for tuning on n validation points instead of the population."""
    if n < 1:
        raise InvalidParam(f"n must be >= 1, got {n}")
    if not 0.0 < delta < 1.0:
        raise InvalidParam(f"delta must lie in (0, 1), got {delta}")
    inner = (4.0 * (1.0 + math.log(n)) + 2.0 * math.log(16.0 / delta)) / n
    return 16.0 * consts.d_bound / consts.gamma * math.sqrt(inner)


# Interface name kept for callers written against the published API.
theorem2_bound = tuning_bound
