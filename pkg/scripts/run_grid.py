#!/usr/bin/env python3
"""Run a simulation grid and write one CSV row per cell.

Examples:
    python scripts/run_grid.py scripts/configs/quick_demo.json --out demo.csv
    python scripts/run_grid.py scripts/configs/study1_positive_grid.json \
        --out study1.csv
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from genbounds.cli import cmd_simulate  # noqa: E402
from genbounds.io import load_config_grid  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", help="JSON grid config (see scripts/configs/)")
    parser.add_argument("--out", default=None, help="output CSV (default: stdout)")
    parser.add_argument("--seed", type=int, default=None, help="override every cell's seed")
    args = parser.parse_args()

    cells = load_config_grid(args.config)
    print(f"{len(cells)} cells x {cells[0].reps} replicates", file=sys.stderr)
    start = time.time()
    code = cmd_simulate(args)
    print(f"done in {time.time() - start:.1f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
