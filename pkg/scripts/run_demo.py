#!/usr/bin/env python3
"""Run every bundled demo configuration into out/.

    python scripts/run_demo.py [--jobs K]
"""

import argparse
import sys
import time
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from robustxai.cli import main as cli_main

DEMOS = [
    ("prob", "demo_fhat_ss.json"),
    ("worst", "demo_ga_worst.json"),
    ("oracle", "demo_oracle_grid.json"),
    ("rank", "demo_rank.json"),
]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    worst = 0
    for command, name in DEMOS:
        path = REPO / "scripts" / "configs" / name
        t0 = time.time()
        code = cli_main([command, "--config", str(path), "--jobs", str(args.jobs)])
        print(f"{command:7s} {name}: exit {code} in {time.time() - t0:.1f}s")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
