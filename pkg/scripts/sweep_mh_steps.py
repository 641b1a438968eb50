#!/usr/bin/env python3
"""Chain-length sensitivity experiment on the bundled rare-event benchmark.

Reruns the estimator at several chain lengths against the frozen Monte Carlo
reference and prints the accuracy column; mirrors the acceptance benchmark so
the numbers can be regenerated and inspected outside the test suite.

    python scripts/sweep_mh_steps.py [--runs 10] [--steps 50 100 250]
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from robustxai.core import Metric, MisinterpretationSpec, NormBall, Region
from robustxai.rng import RngSpec
from robustxai.subset import SsConfig, run_ss
from robustxai.sue import make_builtin_sue
from robustxai.synthetic import synthetic_seed


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--steps", type=int, nargs="+", default=[50, 100, 250])
    parser.add_argument("--proposal-scale", type=float, default=0.05)
    parser.add_argument("--master-seed", type=int, default=0xACC)
    args = parser.parse_args()

    bench = json.loads((REPO / "src/robustxai/data/benchmark_fhat.json").read_text())
    spec = MisinterpretationSpec(Region.F_HAT, Metric.INV_PCC, beta=bench["beta"])
    ball = NormBall(synthetic_seed(bench["seed_index"]), bench["r"], 0.0, 1.0)
    ref = bench["smc"]["ln_p"]
    print(f"reference ln P = {ref:.4f} (delta2 = {bench['smc']['delta2']:.5f}, "
          f"{bench['smc']['n_samples']:.0e} samples)")

    for m in args.steps:
        values = []
        for i in range(args.runs):
            sue = make_builtin_sue(bench["model"], bench["explainer"])
            cfg = SsConfig(samples_per_level=1000, quantile=0.1, mh_steps=m,
                           proposal_scale=args.proposal_scale, lambda_cov=1.0,
                           rng=RngSpec(args.master_seed).child(3, m, i))
            values.append(run_ss(sue, ball, spec, cfg).ln_p)
        dev = np.abs(np.array(values) - ref)
        print(f"M={m:4d}: mean ln P = {np.mean(values):8.4f}  "
              f"mean |delta ln P| = {dev.mean():.4f}  sd = {np.std(values, ddof=1):.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
