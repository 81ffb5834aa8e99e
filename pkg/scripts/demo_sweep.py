#!/usr/bin/env python3
"""Seeded demo sweep: noise-cap x margin grid on a small halfspace cell,
written as CSV plus plot-ready series.

Usage: python3 scripts/demo_sweep.py [--out DIR] [--seed N] [--trials N]
"""

import argparse
import os

from perspectron.harness import ExperimentSpec, emit_csv, emit_plotdata, run_sweep


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="sweep_out")
    ap.add_argument("--seed", type=int, default=20260823)
    ap.add_argument("--trials", type=int, default=10)
    args = ap.parse_args()

    spec = ExperimentSpec(
        mode="halfspace",
        d=10,
        gamma=0.2,
        epsilon=0.2,
        delta=0.25,
        trials=args.trials,
        seed=args.seed,
        n_atoms=40,
        eta=0.2,
        noise_kind="per_atom",
    )
    result = run_sweep(spec, {"eta": [0.05, 0.15, 0.25, 0.35], "gamma": [0.1, 0.2]})

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "sweep.csv")
    emit_csv(result, csv_path)
    paths = emit_plotdata(result, args.out)
    print(f"wrote {csv_path}")
    for p in paths:
        print(f"wrote {p}")
    for row in result.rows:
        print(
            f"cell {row['cell_id']}: eta={row['eta']} gamma={row['gamma']} "
            f"success={row['success_rate']:.0%} mean_loss={row['mean_loss']:.3f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
