"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 internal invariant failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from .data_io import read_columns, read_labels, write_results
from .errors import InputError, InvariantViolation, TwoStepError
from .exact_oracle import BOUND_METRICS, regret_bound_suite
from .experiments import (
    DISCRETE_GRID,
    LINEAR_GRID,
    ExperimentConfig,
    run_discrete,
    run_linear,
)
from .fracmetric import constants, parse_metric
from .learners import TrainConfig
from .proper_loss import PROPER_LOSS_NAMES
from .thresholding import (
    MultilabelScores,
    ScoredSample,
    macro_value,
    metric_at,
    micro_value,
    tuning_bound,
    tune_macro,
    tune_micro,
    tune_threshold,
)

TUNE_SCHEMA = ["label", "theta", "metric_value", "bound_term"]
EVALUATE_SCHEMA = ["label", "theta", "metric_value"]
VERIFY_SCHEMA = ["seed", "metric", "loss", "lhs", "rhs", "holds"]


def _grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(float(v)) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n grid {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text + "\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")


def _train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--reg", type=float, default=None, help="default depends on the loss")
    p.add_argument("--tol", type=float, default=1e-6)


def _file_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scores-file", required=True)
    p.add_argument("--labels-file", required=True)
    p.add_argument("--metric", default="f-beta:1")
    p.add_argument("--averaging", choices=("binary", "macro", "micro"), default="binary")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twostep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-discrete", help="tabular learners on random 25-point models")
    _common(p)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n-grid", type=_grid, default=DISCRETE_GRID)
    p.add_argument("--loss", action="append", help="repeatable (default: logistic, hinge)")
    p.add_argument("--metric", action="append", help="repeatable (default: f-beta:1, am)")
    p.add_argument("--domain-size", type=int, default=25)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("run-linear", help="linear learners on Gaussian logistic models")
    _common(p)
    p.add_argument("--models", type=int, default=20)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--n-grid", type=_grid, default=LINEAR_GRID)
    p.add_argument("--loss", action="append", help="repeatable (default: logistic, hinge)")
    p.add_argument("--metric", action="append", help="repeatable (default: f-beta:1, am)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--test-size", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    _train_flags(p)

    p = sub.add_parser("tune", aliases=["tune-threshold"], help="tune threshold(s) on score/label files")
    _file_flags(p)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--out", default=None)

    p = sub.add_parser("evaluate", help="metric value at given threshold(s)")
    _file_flags(p)
    p.add_argument("--theta", required=True, help="one value, or one per label for macro")
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify-bounds", help="Monte-Carlo check of the regret bounds")
    _common(p)
    p.add_argument("--reps", type=int, default=1000, help="number of random models")
    p.add_argument("--max-size", type=int, default=25)
    p.add_argument("--classifiers", type=int, default=100)
    p.add_argument("--metric", action="append")
    p.add_argument("--loss", action="append")
    p.add_argument("--delta", type=float, default=None, help="unused; accepted for symmetry")
    return parser


def _load(args) -> MultilabelScores:
    scores = read_columns(args.scores_file)
    labels = read_labels(args.labels_file)
    return MultilabelScores(scores, labels)


def _bound_term(sample: ScoredSample, metric, value: float, delta: float, n: int | None = None) -> float:
    """Validation-tuning term of the regret bound; NaN when gamma is not positive."""
    try:
        consts = constants(metric.at_prior(sample.prior, check=True), value)
    except TwoStepError:
        return float("nan")
    return tuning_bound(sample.n if n is None else n, delta, consts)


def cmd_tune(args) -> str:
    data = _load(args)
    metric = parse_metric(args.metric)
    rows = []
    if args.averaging == "binary":
        if data.m != 1:
            raise InputError(f"binary averaging needs one score column, got {data.m}")
        sample = data.label(0)
        t = tune_threshold(sample, metric)
        rows.append({"label": "all", "theta": t.theta, "metric_value": t.metric_value,
                     "bound_term": _bound_term(sample, metric, t.metric_value, args.delta)})
    elif args.averaging == "macro":
        res = tune_macro(data, metric)
        for i, t in enumerate(res.per_label):
            rows.append({"label": i, "theta": t.theta, "metric_value": t.metric_value,
                         "bound_term": _bound_term(data.label(i), metric, t.metric_value, args.delta)})
        bound = float(np.mean([r["bound_term"] for r in rows]))
        rows.append({"label": "macro", "theta": None, "metric_value": res.value, "bound_term": bound})
    else:
        t = tune_micro(data, metric)
        pooled = ScoredSample(data.scores.ravel(), data.labels.ravel())
        # n counts i.i.d. instances, not the m*n pooled (instance, label) pairs.
        bound = _bound_term(pooled, metric, t.metric_value, args.delta, n=data.n)
        rows.append({"label": "micro", "theta": t.theta, "metric_value": t.metric_value, "bound_term": bound})
    return write_results(rows, TUNE_SCHEMA)


def cmd_evaluate(args) -> str:
    data = _load(args)
    metric = parse_metric(args.metric)
    try:
        thetas = [float(v) for v in args.theta.split(",")]
    except ValueError:
        raise InputError(f"bad --theta {args.theta!r}") from None
    rows = []
    if args.averaging == "binary":
        if data.m != 1 or len(thetas) != 1:
            raise InputError("binary averaging needs one score column and one threshold")
        rows.append({"label": "all", "theta": thetas[0],
                     "metric_value": metric_at(data.label(0), metric, thetas[0])})
    elif args.averaging == "macro":
        if len(thetas) == 1:
            thetas = thetas * data.m
        for i, th in enumerate(thetas[: data.m]):
            rows.append({"label": i, "theta": th, "metric_value": metric_at(data.label(i), metric, th)})
        rows.append({"label": "macro", "theta": None, "metric_value": macro_value(data, metric, thetas)})
    else:
        if len(thetas) != 1:
            raise InputError("micro averaging uses a single shared threshold")
        rows.append({"label": "micro", "theta": thetas[0],
                     "metric_value": micro_value(data, metric, thetas[0])})
    return write_results(rows, EVALUATE_SCHEMA)


def cmd_verify(args) -> str:
    metrics = tuple(args.metric or BOUND_METRICS)
    losses = tuple(args.loss or PROPER_LOSS_NAMES)
    records = list(regret_bound_suite(args.reps, args.seed, args.max_size, metrics, losses, args.classifiers))
    checks = ("holds", "cs_transfer_holds", "surrogate_transfer_holds", "tuned_holds", "nonnegative")
    failed = {c: sum(not r[c] for r in records) for c in checks}
    text = write_results([{k: r[k] for k in VERIFY_SCHEMA} for r in records], VERIFY_SCHEMA)
    print(f"verify-bounds: {len(records)} tuples; failures: {failed}", file=sys.stderr)
    if any(failed.values()):
        _emit(text, args.out)
        raise InvariantViolation(f"bound violated: {failed}")
    return text


def _experiment_cfg(args, experiment: str) -> ExperimentConfig:
    extra = {}
    if experiment == "linear":
        extra = dict(
            models=args.models,
            dim=args.dim,
            test_size=args.test_size,
            train=TrainConfig(max_iters=args.iters, learning_rate=args.lr, reg=args.reg,
                              tol=args.tol, seed=args.seed),
        )
    else:
        extra = dict(domain_size=args.domain_size)
    return ExperimentConfig(
        experiment=experiment,
        n_grid=args.n_grid,
        reps=args.reps,
        losses=tuple(args.loss or ("logistic", "hinge")),
        metrics=tuple(args.metric or ("f-beta:1", "am")),
        seed=args.seed,
        workers=args.workers,
        **extra,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run-discrete":
            text = run_discrete(_experiment_cfg(args, "discrete"))
        elif args.command == "run-linear":
            text = run_linear(_experiment_cfg(args, "linear"))
        elif args.command in ("tune", "tune-threshold"):
            text = cmd_tune(args)
        elif args.command == "evaluate":
            text = cmd_evaluate(args)
        else:
            text = cmd_verify(args)
        _emit(text, args.out)
    except InvariantViolation as exc:
        print(f"twostep: invariant failure: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"twostep: {exc}", file=sys.stderr)
        return 1
    except TwoStepError as exc:
        print(f"twostep: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
