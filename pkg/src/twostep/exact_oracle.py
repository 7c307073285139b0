"""Exact population quantities on finite discrete models.

With a finite domain, known Pr(x) and eta(x) = Pr(y=1 | x), every population
quantity (FP, FN, metric value, surrogate risk, cost-sensitive risk) is a
finite sum, so regrets can be computed exactly rather than estimated.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParam
from .data_io import write_results
from .fracmetric import (
    ConfusionRates,
    FractionalMetric,
    evaluate,
    gamma_of,
    optimal_threshold_eta,
    parse_metric,
)
from .proper_loss import (
    PROPER_LOSS_NAMES,
    MarginLoss,
    ProperLoss,
    builtin_loss,
    conditional_regret,
)
from .thresholding import candidate_thresholds

BOUND_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteModel:
    probs: np.ndarray
    etas: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        etas = np.asarray(self.etas, dtype=float).ravel()
        if probs.shape != etas.shape or probs.size == 0:
            raise DimensionMismatch(f"probs {probs.shape} vs etas {etas.shape}")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidParam("probs must be non-negative and sum to 1")
        if np.any((etas < 0) | (etas > 1)):
            raise InvalidParam("etas must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "etas", etas)

    @property
    def size(self) -> int:
        return self.probs.size

    @property
    def prior(self) -> float:
        return float(np.dot(self.probs, self.etas))


def random_model(size: int, rng: np.random.Generator) -> DiscreteModel:
    """Uniform Pr(x) over ``size`` points, eta(x) i.i.d. uniform on [0, 1]."""
    if size < 1:
        raise InvalidParam(f"size must be >= 1, got {size}")
    return DiscreteModel(np.full(size, 1.0 / size), rng.uniform(0.0, 1.0, size))


def _as_classifier(model: DiscreteModel, h) -> np.ndarray:
    h = np.asarray(h).ravel()
    if h.size != model.size:
        raise DimensionMismatch(f"classifier of length {h.size} for model of size {model.size}")
    if not np.all(np.isin(h, (-1, 1))):
        raise InvalidParam("classifier entries must be -1 or +1")
    return h


def threshold_scorer(f, theta: float) -> np.ndarray:
    """sgn(f - theta) with sgn(0) = -1."""
    return np.where(np.asarray(f, dtype=float) > theta, 1, -1).astype(np.int8)


def population_rates(model: DiscreteModel, h) -> ConfusionRates:
    pos = _as_classifier(model, h) == 1
    fp = float(np.sum(model.probs[pos] * (1.0 - model.etas[pos])))
    fn = float(np.sum(model.probs[~pos] * model.etas[~pos]))
    prior = model.prior
    # Clip summation roundoff back inside the feasible box.
    return ConfusionRates(fp=min(fp, 1.0 - prior), fn_=min(fn, prior), prior=prior)


def _metric_for(model: DiscreteModel, metric: FractionalMetric) -> FractionalMetric:
    m = metric.at_prior(model.prior)
    gamma_of(m)  # raises NonPositiveGamma for a degenerate prior
    return m


def psi_of(model: DiscreteModel, metric: FractionalMetric, h) -> float:
    m = _metric_for(model, metric)
    return evaluate(m, population_rates(model, h))


def optimal_classifier(model: DiscreteModel, metric: FractionalMetric) -> tuple[np.ndarray, float]:
    """Best classifier among the |distinct eta| + 1 thresholdings of eta.

    Ties in metric value go to the classifier with the most positives.
    """
    m = _metric_for(model, metric)
    order = np.argsort(-model.etas, kind="stable")
    e = model.etas[order]
    p = model.probs[order]
    # k = number of top-eta points predicted positive; only cut between distinct etas.
    fp = np.concatenate(([0.0], np.cumsum(p * (1.0 - e))))
    tp = np.concatenate(([0.0], np.cumsum(p * e)))
    fn = model.prior - tp
    ks = np.arange(model.size + 1)
    valid = np.ones(model.size + 1, dtype=bool)
    valid[1:-1] = e[:-1] != e[1:]
    values = np.where(valid, m.values(fp, np.maximum(fn, 0.0)), -np.inf)
    k = int(ks[::-1][np.argmax(values[::-1])])
    h = -np.ones(model.size, dtype=np.int8)
    h[order[:k]] = 1
    return h, evaluate(m, population_rates(model, h))


def optimal_value(model: DiscreteModel, metric: FractionalMetric) -> float:
    return optimal_classifier(model, metric)[1]


def psi_regret(
    model: DiscreteModel, metric: FractionalMetric, h, psi_star: float | None = None
) -> float:
    if psi_star is None:
        psi_star = optimal_value(model, metric)
    return psi_star - psi_of(model, metric, h)


def surrogate_regret(model: DiscreteModel, loss: ProperLoss | MarginLoss, f) -> float:
    f = np.asarray(f, dtype=float).ravel()
    if f.size != model.size:
        raise DimensionMismatch(f"scorer of length {f.size} for model of size {model.size}")
    live = model.probs > 0
    reg = conditional_regret(loss, model.etas[live], f[live])
    return float(np.dot(model.probs[live], reg))


def cost_sensitive_regret(model: DiscreteModel, alpha: float, h) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParam(f"alpha must lie in [0, 1], got {alpha}")
    h = _as_classifier(model, h)
    best = threshold_scorer(model.etas, alpha)
    wrong = h != best
    return float(np.sum(model.probs[wrong] * np.abs(model.etas[wrong] - alpha)))


def cost_sensitive_risk_of(model: DiscreteModel, alpha: float, h) -> float:
    r = population_rates(model, h)
    return alpha * r.fp + (1.0 - alpha) * r.fn_


@dataclass(frozen=True)
class RegretBoundReport:
    alpha: float
    theta_star: float
    cee: float
    lhs: float
    rhs: float
    holds: bool
    cs_transfer_lhs: float
    cs_transfer_rhs: float
    cs_transfer_holds: bool
    surrogate_transfer_lhs: float
    surrogate_transfer_rhs: float
    surrogate_transfer_holds: bool
    tuned_regret: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (1.0 if self.lhs == 0 else math.inf)


def _bound_constants(m: FractionalMetric, psi_star: float) -> tuple[float, float]:
    """(C, alpha) without the grid search that D needs."""
    gamma = gamma_of(m)
    cee = (psi_star * (m.b1 + m.b2) - (m.a1 + m.a2)) / gamma
    alpha = min(max(optimal_threshold_eta(m, psi_star), 0.0), 1.0)
    return cee, alpha


def classifier_values(model: DiscreteModel, metric: FractionalMetric, H: np.ndarray) -> np.ndarray:
    """Population metric of every row of the +-1 matrix H (one classifier per row)."""
    m = _metric_for(model, metric)
    pos = (np.asarray(H) == 1).astype(float)
    fp = pos @ (model.probs * (1.0 - model.etas))
    fn = (1.0 - pos) @ (model.probs * model.etas)
    return m.values(fp, fn)


def best_threshold_regret(model: DiscreteModel, metric: FractionalMetric, f, psi_star: float) -> float:
    """Smallest metric regret over all thresholds applied to the scorer f."""
    f = np.asarray(f, dtype=float).ravel()
    thetas = candidate_thresholds(f)
    H = np.where(f[None, :] > thetas[:, None], 1, -1)
    return float(psi_star - np.max(classifier_values(model, metric, H)))


def verify_regret_bound(
    model: DiscreteModel,
    metric: FractionalMetric,
    loss: ProperLoss,
    f,
    tol: float = BOUND_TOL,
) -> RegretBoundReport:
    """Check the surrogate-regret bound for the scorer f thresholded at link(alpha).

    Also reports the two intermediate inequalities (metric regret vs
    cost-sensitive regret, cost-sensitive regret vs surrogate regret) and the
    regret of the best population threshold on f, which may never exceed lhs.
    """
    f = np.asarray(f, dtype=float).ravel()
    _, psi_star = optimal_classifier(model, metric)
    m = _metric_for(model, metric)
    cee, alpha = _bound_constants(m, psi_star)
    theta_star = float(loss.link(alpha))
    h = threshold_scorer(f, theta_star)

    reg_l = surrogate_regret(model, loss, f)
    reg_psi = psi_regret(model, m, h, psi_star)
    reg_alpha = cost_sensitive_regret(model, alpha, h)
    scale = math.sqrt(2.0 / loss.lambda_)

    rhs = cee * scale * math.sqrt(reg_l)
    cs_transfer_rhs = cee * reg_alpha
    surrogate_transfer_rhs = scale * math.sqrt(reg_l)
    return RegretBoundReport(
        alpha=alpha,
        theta_star=theta_star,
        cee=cee,
        lhs=reg_psi,
        rhs=rhs,
        holds=reg_psi <= rhs + tol,
        cs_transfer_lhs=reg_psi,
        cs_transfer_rhs=cs_transfer_rhs,
        cs_transfer_holds=reg_psi <= cs_transfer_rhs + tol,
        surrogate_transfer_lhs=reg_alpha,
        surrogate_transfer_rhs=surrogate_transfer_rhs,
        surrogate_transfer_holds=reg_alpha <= surrogate_transfer_rhs + tol,
        tuned_regret=best_threshold_regret(model, m, f, psi_star),
    )


# Interface name kept for callers written against the published API.
verify_lemma1 = verify_regret_bound


def cs_transfer_margins(model: DiscreteModel, metric: FractionalMetric, H: np.ndarray) -> np.ndarray:
    """C * Reg_alpha(h) - Reg_Psi(h) for every row h of H; never negative in theory."""
    _, psi_star = optimal_classifier(model, metric)
    m = _metric_for(model, metric)
    cee, alpha = _bound_constants(m, psi_star)
    H = np.asarray(H)
    reg_psi = psi_star - classifier_values(model, m, H)
    wrong = H != threshold_scorer(model.etas, alpha)[None, :]
    reg_alpha = wrong.astype(float) @ (model.probs * np.abs(model.etas - alpha))
    return cee * reg_alpha - reg_psi


def surrogate_transfer_margin(model: DiscreteModel, alpha: float, loss: ProperLoss, f) -> float:
    """sqrt(2/lambda) sqrt(Reg_l(f)) - Reg_alpha(h_{f, link(alpha)})."""
    h = threshold_scorer(f, float(loss.link(alpha)))
    reg_alpha = cost_sensitive_regret(model, alpha, h)
    return math.sqrt(2.0 / loss.lambda_) * math.sqrt(surrogate_regret(model, loss, f)) - reg_alpha


def random_scorer(model: DiscreteModel, loss: ProperLoss, rng: np.random.Generator) -> np.ndarray:
    """Scorer whose surrogate regret spans several orders of magnitude.

    Half the time the link of a perturbed eta (noise scale log-uniform in
    [1e-3, 1]), otherwise unrelated Gaussian scores.
    """
    if rng.random() < 0.5:
        sigma = 10.0 ** rng.uniform(-3.0, 0.0)
        eta_hat = np.clip(model.etas + sigma * rng.standard_normal(model.size), 1e-6, 1 - 1e-6)
        return np.asarray(loss.link(eta_hat), dtype=float)
    return 2.0 * rng.standard_normal(model.size)


BOUND_METRICS = ("accuracy", "f-beta:1", "am", "jaccard")


def regret_bound_suite(
    n_models: int,
    seed: int = 0,
    max_size: int = 25,
    metrics: tuple[str, ...] = BOUND_METRICS,
    losses: tuple[str, ...] = PROPER_LOSS_NAMES,
    classifiers: int = 100,
    tol: float = 1e-9,
):
    """Yield one record per (model, metric, loss) with every bound checked.

    Models are drawn with |X| uniform in [1, max_size], uniform Pr(x) and
    uniform eta; model i uses seed ``seed ^ i``.
    """
    metric_objs = [parse_metric(name) for name in metrics]
    loss_objs = [builtin_loss(name) for name in losses]
    for i in range(n_models):
        s = seed ^ i
        rng = np.random.default_rng(s)
        model = random_model(int(rng.integers(1, max_size + 1)), rng)
        H = np.where(rng.random((classifiers, model.size)) < 0.5, 1, -1)
        scorers = {loss.name: random_scorer(model, loss, rng) for loss in loss_objs}
        alpha = float(rng.random())
        for metric in metric_objs:
            p1 = cs_transfer_margins(model, metric, H) if classifiers else np.zeros(1)
            for loss in loss_objs:
                f = scorers[loss.name]
                r = verify_regret_bound(model, metric, loss, f, tol=tol)
                p2 = surrogate_transfer_margin(model, alpha, loss, f)
                yield {
                    "seed": s,
                    "metric": metric.name,
                    "loss": loss.name,
                    "lhs": r.lhs,
                    "rhs": r.rhs,
                    "holds": r.holds,
                    "cs_transfer_holds": r.cs_transfer_holds and bool(np.min(p1) >= -tol),
                    "surrogate_transfer_holds": r.surrogate_transfer_holds and p2 >= -tol,
                    "tuned_holds": r.tuned_regret <= r.lhs + tol,
                    "nonnegative": min(r.lhs, r.tuned_regret) >= -tol,
                }


def model_to_csv(model: DiscreteModel) -> str:
    rows = [{"prob": p, "eta": e} for p, e in zip(model.probs, model.etas)]
    return write_results(rows, ["prob", "eta"])


def model_from_csv(text: str) -> DiscreteModel:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["prob", "eta"]:
        raise InvalidParam(f"model CSV must have header prob,eta; got {reader.fieldnames}")
    rows = list(reader)
    return DiscreteModel([float(r["prob"]) for r in rows], [float(r["eta"]) for r in rows])
