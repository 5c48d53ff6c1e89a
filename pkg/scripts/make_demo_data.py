#!/usr/bin/env python3
"""Generate a unit-level CSV from the built-in data-generating process.

Handy for exercising the ``genbounds bounds`` / ``genbounds bootstrap``
commands on realistic data:

    python scripts/make_demo_data.py demo.csv --study 1 --seed 7
    genbounds bounds demo.csv --y-range -2,2 --strata 5 --covariates 1,2
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from genbounds import SimConfig, simulate_study  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out")
    parser.add_argument("--study", type=int, default=1)
    parser.add_argument("--population-size", type=int, default=2000)
    parser.add_argument("--sample-size", type=int, default=100)
    parser.add_argument("--delta", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    config = SimConfig(
        study=args.study,
        N=args.population_size,
        n=args.sample_size,
        delta=args.delta,
        seed=args.seed,
    )
    sim = simulate_study(config, np.random.default_rng([args.seed, 0]))
    data = sim.data
    with open(args.out, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", "z", "w", "y"] + [f"x{j + 1}" for j in range(4)])
        for i in range(data.n_population):
            sampled = bool(data.z[i])
            writer.writerow(
                [
                    f"u{i}",
                    int(sampled),
                    int(data.w[i]) if sampled else "",
                    format(data.y[i], ".17g") if sampled else "",
                ]
                + [format(v, ".17g") for v in data.x[i]]
            )
    print(f"wrote {data.n_population} units ({data.n_sample} sampled) to {args.out}",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
