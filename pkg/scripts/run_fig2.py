"""Linear learners on Gaussian-input logistic models: mean metric regret and
surrogate regret against n, estimated on a 100k test draw per model.

    python3 scripts/run_fig2.py --models 20 --reps 20 --out results/linear.csv
"""

import argparse
from pathlib import Path

import numpy as np

from twostep.data_io import write_results
from twostep.experiments import LINEAR_GRID, LINEAR_SCHEMA, ExperimentConfig, run_linear_rows
from twostep.learners import TrainConfig


def summarise(rows, column):
    ns = sorted({r["n"] for r in rows})
    print(f"\n{column}")
    print(f"{'loss':<10}{'metric':<10}" + "".join(f"{n:>12}" for n in ns))
    keys = dict.fromkeys((r["loss"], r["metric"]) for r in rows)
    for loss, metric in keys:
        means = [np.mean([r[column] for r in rows if (r["loss"], r["metric"], r["n"]) == (loss, metric, n)]) for n in ns]
        print(f"{loss:<10}{metric:<10}" + "".join(f"{m:>12.5f}" for m in means))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--models", type=int, default=20)
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--n-grid", type=int, nargs="+", default=list(LINEAR_GRID))
    ap.add_argument("--test-size", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--hinge-reg", type=float, default=None, help="override the hinge regulariser")
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        "linear", tuple(args.n_grid), reps=args.reps, models=args.models, dim=args.dim,
        seed=args.seed, workers=args.workers, test_size=args.test_size, train=TrainConfig(reg=args.hinge_reg),
    )
    rows = run_linear_rows(cfg)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(write_results(rows, LINEAR_SCHEMA) + "\n")
    summarise(rows, "psi_regret")
    summarise(rows, "surrogate_regret")


if __name__ == "__main__":
    main()
