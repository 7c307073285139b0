"""Large-sample limit of the tabular hinge learner's F1 regret.

With infinite data the tabular hinge minimiser is sgn(eta - 1/2) at every
point, so thresholding can only choose among sgn(eta - 1/2), all-positive and
all-negative. This script averages the exact regret of the best of the three
over many random 25-point models; it is the floor the finite-n hinge curve
approaches.
"""

import argparse

import numpy as np

from twostep.exact_oracle import optimal_classifier, psi_of, random_model
from twostep.fracmetric import parse_metric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--models", type=int, default=20000)
    ap.add_argument("--size", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--metric", nargs="+", default=["f-beta:1", "am"])
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    for name in args.metric:
        metric = parse_metric(name)
        regrets = []
        for _ in range(args.models):
            model = random_model(args.size, rng)
            _, best = optimal_classifier(model, metric)
            sign = np.where(model.etas > 0.5, 1, -1)
            candidates = [sign, np.ones(args.size, int), -np.ones(args.size, int)]
            values = []
            for h in candidates:
                try:
                    values.append(psi_of(model, metric, h))
                except ArithmeticError:
                    pass
            regrets.append(best - max(values))
        r = np.asarray(regrets)
        print(f"{name:<10} mean regret {r.mean():.5f} +- {r.std(ddof=1) / np.sqrt(r.size):.5f} ({r.size} models)")


if __name__ == "__main__":
    main()
