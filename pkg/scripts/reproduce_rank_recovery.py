#!/usr/bin/env python3
"""Reproduce the rank-recovery calibration curve.

Runs the budget-sweep simulation at the study scale (two groups of 50
items, budgets 100-2000, 50 replicates) and prints one line per budget.
With --csv the curve is also written to disk.
"""

import argparse
import csv

from duelbias.tournament import DEFAULT_BUDGETS, simulate_rank_recovery


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--items-per-group", type=int, default=50)
    parser.add_argument(
        "--budgets",
        default=",".join(str(b) for b in DEFAULT_BUDGETS),
        help="comma-separated total duel budgets",
    )
    parser.add_argument("--replicates", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--outcome", choices=["rater-normal", "bradley-terry"],
        default="rater-normal",
    )
    parser.add_argument("--rater-noise", type=float, default=0.25)
    parser.add_argument("--csv", default=None, help="write the curve here")
    args = parser.parse_args()

    budgets = [int(b) for b in args.budgets.split(",")]
    curve = simulate_rank_recovery(
        args.items_per_group,
        budgets=budgets,
        replicates=args.replicates,
        seed=args.seed,
        outcome_noise=args.outcome,
        rater_noise_scale=args.rater_noise,
    )
    print(f"{'budget':>8}  {'mean_tau':>9}  {'std_tau':>8}")
    for budget, mean, std in zip(curve.budgets, curve.mean_tau, curve.std_tau):
        print(f"{budget:>8}  {mean:>9.4f}  {std:>8.4f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["budget", "mean_tau", "std_tau"])
            for row in zip(curve.budgets, curve.mean_tau, curve.std_tau):
                writer.writerow(row)
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
