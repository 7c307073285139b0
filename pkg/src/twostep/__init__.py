"""Surrogate-loss training plus validation threshold tuning for
linear-fractional classification metrics, with exact regret oracles."""

from .exact_oracle import (
    DiscreteModel,
    cost_sensitive_regret,
    optimal_classifier,
    population_rates,
    psi_regret,
    surrogate_regret,
    verify_lemma1,
    verify_regret_bound,
)
from .fracmetric import (
    ConfusionRates,
    FractionalMetric,
    MetricConstants,
    builtin,
    constants,
    cost_sensitive_risk,
    evaluate,
    optimal_threshold_eta,
    parse_metric,
)
from .learners import TrainConfig, fit_linear, fit_tabular
from .proper_loss import builtin_loss, conditional_regret, conditional_risk, cpe_partials
from .thresholding import (
    MultilabelScores,
    ScoredSample,
    TunedThreshold,
    empirical_rates,
    theorem2_bound,
    tuning_bound,
    tune_macro,
    tune_micro,
    tune_threshold,
)

__version__ = "0.1.0"
