"""Synthetic regret experiments: tabular learners on a finite domain and
linear learners on a Gaussian-input logistic model."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data_io import write_results
from .errors import InvalidParam
from .exact_oracle import (
    DiscreteModel,
    optimal_classifier,
    psi_of,
    surrogate_regret,
    threshold_scorer,
)
from .fracmetric import FractionalMetric, parse_metric
from .learners import (
    TrainConfig,
    fit_linear,
    fit_tabular,
    generate_discrete,
    generate_logistic_model,
    sample_from,
)
from .proper_loss import builtin_loss
from .thresholding import ScoredSample, tune_threshold

DISCRETE_SCHEMA = ["n", "rep", "loss", "metric", "psi_regret", "surrogate_regret"]
LINEAR_SCHEMA = ["n", "rep", "model_seed", "loss", "metric", "psi_regret", "surrogate_regret"]

DISCRETE_GRID = (100, 316, 1000, 3162, 10000)
LINEAR_GRID = (100, 316, 1000, 3000)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_grid: tuple[int, ...]
    reps: int
    losses: tuple[str, ...] = ("logistic", "hinge")
    metrics: tuple[str, ...] = ("f-beta:1", "am")
    seed: int = 0
    models: int = 1
    domain_size: int = 25
    dim: int = 2
    test_size: int = 100_000
    train: TrainConfig = field(default_factory=TrainConfig)
    workers: int = 1

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidParam(f"n grid must be positive and increasing, got {self.n_grid}")
        if self.reps < 1 or self.models < 1:
            raise InvalidParam("reps and models must be >= 1")
        for name in self.losses:
            builtin_loss(name)
        for name in self.metrics:
            parse_metric(name)
        object.__setattr__(self, "n_grid", grid)


def rep_seed(seed: int, rep: int) -> int:
    return seed ^ rep


def _discrete_rep(cfg: ExperimentConfig, rep: int) -> list[dict]:
    s = rep_seed(cfg.seed, rep)
    model = generate_discrete(cfg.domain_size, np.random.default_rng([s, 0]))
    metrics = [parse_metric(m) for m in cfg.metrics]
    optima = {m.name: optimal_classifier(model, m)[1] for m in metrics}
    rows = []
    for n in cfg.n_grid:
        rng = np.random.default_rng([s, 1, n])
        x_tr, y_tr = sample_from(model, n, rng)
        x_va, y_va = sample_from(model, n, rng)
        for loss_name in cfg.losses:
            loss = builtin_loss(loss_name)
            fit = fit_tabular(x_tr, y_tr, loss, model.size)
            reg_l = surrogate_regret(model, loss, fit.scores)
            val = ScoredSample(fit.scores[x_va], y_va)
            for metric in metrics:
                theta = tune_threshold(val, metric).theta
                h = threshold_scorer(fit.scores, theta)
                rows.append(
                    {
                        "n": n,
                        "rep": rep,
                        "loss": loss_name,
                        "metric": metric.name,
                        "psi_regret": optima[metric.name] - psi_of(model, metric, h),
                        "surrogate_regret": reg_l,
                    }
                )
    return rows


def _linear_job(cfg: ExperimentConfig, model_idx: int) -> list[dict]:
    """All reps and sizes for one logistic model, sharing one test draw."""
    model_seed = rep_seed(cfg.seed, model_idx)
    truth = generate_logistic_model(cfg.dim, np.random.default_rng([model_seed, 0]))
    X_te, _, eta_te = truth.sample(cfg.test_size, np.random.default_rng([model_seed, 1]))
    # The test draw with its known eta acts as a uniform discrete model.
    test_model = DiscreteModel(np.full(cfg.test_size, 1.0 / cfg.test_size), eta_te)
    metrics = [parse_metric(m) for m in cfg.metrics]
    optima = {m.name: optimal_classifier(test_model, m)[1] for m in metrics}
    rows = []
    for rep in range(cfg.reps):
        for n in cfg.n_grid:
            X, y, _ = truth.sample(n, np.random.default_rng([model_seed, 2, rep, n]))
            n_fit = int(np.floor(2 * n / 3 + 0.5))
            for loss_name in cfg.losses:
                fitted = fit_linear(X[:n_fit], y[:n_fit], loss_name, cfg.train)
                val = ScoredSample(fitted.decision(X[n_fit:]), y[n_fit:])
                f_te = fitted.decision(X_te)
                reg_l = surrogate_regret(test_model, builtin_loss(loss_name), f_te)
                for metric in metrics:
                    theta = tune_threshold(val, metric).theta
                    h = threshold_scorer(f_te, theta)
                    rows.append(
                        {
                            "n": n,
                            "rep": rep,
                            "model_seed": model_seed,
                            "loss": loss_name,
                            "metric": metric.name,
                            "psi_regret": optima[metric.name] - psi_of(test_model, metric, h),
                            "surrogate_regret": reg_l,
                        }
                    )
    return rows


def _gather(fn, cfg: ExperimentConfig, jobs: range) -> list[dict]:
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(fn, [cfg] * len(jobs), jobs))
    else:
        chunks = [fn(cfg, j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def _order(metrics: list[str], losses: list[str]):
    def key(row):
        return (
            row["n"],
            row.get("model_seed", 0),
            row["rep"],
            losses.index(row["loss"]),
            metrics.index(row["metric"]),
        )

    return key


def run_discrete_rows(cfg: ExperimentConfig) -> list[dict]:
    rows = _gather(_discrete_rep, cfg, range(cfg.reps))
    names = [parse_metric(m).name for m in cfg.metrics]
    return sorted(rows, key=_order(names, list(cfg.losses)))


def run_linear_rows(cfg: ExperimentConfig) -> list[dict]:
    rows = _gather(_linear_job, cfg, range(cfg.models))
    names = [parse_metric(m).name for m in cfg.metrics]
    return sorted(rows, key=_order(names, list(cfg.losses)))


def run_discrete(cfg: ExperimentConfig) -> str:
    return write_results(run_discrete_rows(cfg), DISCRETE_SCHEMA)


def run_linear(cfg: ExperimentConfig) -> str:
    return write_results(run_linear_rows(cfg), LINEAR_SCHEMA)


def mean_curve(rows: list[dict], loss: str, metric: str, column: str = "psi_regret") -> dict[int, float]:
    """Mean of ``column`` per n for one (loss, metric) pair."""
    acc: dict[int, list[float]] = {}
    for r in rows:
        if r["loss"] == loss and r["metric"] == metric:
            acc.setdefault(r["n"], []).append(r[column])
    return {n: float(np.mean(v)) for n, v in sorted(acc.items())}
