"""Tabular learners on random 25-point models: mean metric regret against n.

    python3 scripts/run_fig1.py --reps 200 --out results/discrete.csv
"""

import argparse
from pathlib import Path

import numpy as np

from twostep.data_io import write_results
from twostep.experiments import DISCRETE_GRID, DISCRETE_SCHEMA, ExperimentConfig, run_discrete_rows


def summarise(rows, losses, metrics):
    print(f"{'loss':<10}{'metric':<10}" + "".join(f"{n:>12}" for n in sorted({r['n'] for r in rows})))
    for loss in losses:
        for metric in metrics:
            by_n = {}
            for r in rows:
                if r["loss"] == loss and r["metric"] == metric:
                    by_n.setdefault(r["n"], []).append(r["psi_regret"])
            print(f"{loss:<10}{metric:<10}" + "".join(f"{np.mean(v):>12.5f}" for _, v in sorted(by_n.items())))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--n-grid", type=int, nargs="+", default=list(DISCRETE_GRID))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--loss", nargs="+", default=["logistic", "squared", "hinge"])
    ap.add_argument("--metric", nargs="+", default=["f-beta:1", "am"])
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        "discrete", tuple(args.n_grid), reps=args.reps, losses=tuple(args.loss),
        metrics=tuple(args.metric), seed=args.seed, workers=args.workers,
    )
    rows = run_discrete_rows(cfg)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(write_results(rows, DISCRETE_SCHEMA) + "\n")
    summarise(rows, cfg.losses, [r for r in dict.fromkeys(x["metric"] for x in rows)])


if __name__ == "__main__":
    main()
