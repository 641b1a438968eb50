#!/usr/bin/env python3
"""Regenerate the bundled assets: toy weights, golden files, benchmark calibration.

Everything here is deterministic. The weights are synthesized once from fixed
Philox streams (no training pipeline in this repo); the rare-event benchmark
threshold is calibrated by a 10^7-sample Monte Carlo run and frozen so the
acceptance suite does not pay the calibration cost on every run.

Usage: python scripts/make_assets.py [--skip-calibration]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from robustxai.core import Metric, MisinterpretationSpec, NormBall, Region, prediction_loss_batch
from robustxai.explainers import gradient_x_input, integrated_gradients, occlusion
from robustxai.mlp import MlpModel, mlp_forward, save_weights_file
from robustxai.oracles import grid_worst_case, run_smc
from robustxai.rng import RngSpec
from robustxai.sue import ModelSue
from robustxai.synthetic import synthetic_seed, synthetic_seeds

DATA = REPO / "src" / "robustxai" / "data"
GOLDENS = REPO / "tests" / "goldens"

# frozen generator parameters; changing any of these invalidates every golden
TOY8X8 = dict(dims=[64, 32, 32, 4], scale=2.4, beta_sp=2.0, key=12345, bias_scale=0.1)
TOY2D = dict(dims=[2, 16, 16, 2], scale=4.0, beta_sp=3.0, key=99, bias_scale=0.3)

BENCH_R = 0.3
BENCH_PCC_THRESHOLD = 0.5  # beta = 1 / threshold
BENCH_SEED_INDEX = 0
CALIBRATION_SAMPLES = 10_000_000

PROBES_2D = {
    "grid_seeds": [[0.1, 0.3], [0.5, 0.5], [0.7, 0.7]],
    "robust_seed": [0.1, 0.5],
    "ae_pocket_seed": [0.1, 0.3],
    "r": 0.15,
}


def synth_model(spec: dict, name: str) -> MlpModel:
    gen = RngSpec(spec["key"]).generator()
    dims = spec["dims"]
    layers = []
    for i in range(len(dims) - 1):
        w = gen.normal(0, spec["scale"] / np.sqrt(dims[i]), size=(dims[i + 1], dims[i]))
        b = gen.normal(0, spec["bias_scale"], size=dims[i + 1])
        layers.append((w, b))
    return MlpModel(layers=layers, activation="softplus", beta_sp=spec["beta_sp"],
                    softmax=True, name=name)


def write_goldens(model8: MlpModel, model2: MlpModel):
    GOLDENS.mkdir(parents=True, exist_ok=True)
    probe = synthetic_seed(0)
    golden = {
        "probe_index": 0,
        "forward_probs": mlp_forward(model8, probe).tolist(),
        "gradient_x_input": gradient_x_input(model8, probe).tolist(),
        "occlusion": occlusion(model8, probe).tolist(),
        "integrated_gradients_m64": integrated_gradients(model8, probe, steps=64).tolist(),
    }
    (GOLDENS / "toy8x8_probe.json").write_text(json.dumps(golden, indent=1) + "\n")

    sue = ModelSue(model2, explainer="gxi")
    spec = MisinterpretationSpec(region=Region.F_HAT, metric=Metric.MSE, alpha=1.0, beta=1.0)
    grid_golden = {"r": PROBES_2D["r"], "resolution": 401, "metric": "mse", "seeds": []}
    for seed in PROBES_2D["grid_seeds"]:
        ball = NormBall(np.array(seed), PROBES_2D["r"], 0.0, 1.0)
        res = grid_worst_case(sue, ball, spec, resolution=401)
        grid_golden["seeds"].append({"seed": seed, "best_point": res.best_point.tolist(),
                                     "best_d": res.best_d})
        print(f"  grid golden seed={seed}: best_d={res.best_d:.8g}")
    (GOLDENS / "toy2d_grid.json").write_text(json.dumps(grid_golden, indent=1) + "\n")


def check_probes(model8: MlpModel, model2: MlpModel):
    seeds = synthetic_seeds(10)
    probs = mlp_forward(model8, seeds)
    for i in range(10):
        j = prediction_loss_batch(probs[i], probs[i:i + 1])[0]
        assert j < -0.05, f"seed {i} is not confidently classified (J={j})"

    def grid_j(seed, r, n=201):
        p0 = mlp_forward(model2, np.asarray(seed))
        ball = NormBall(np.asarray(seed), r, 0.0, 1.0)
        lo, hi = ball.bounds()
        gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n),
                             indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        return prediction_loss_batch(p0, mlp_forward(model2, pts))

    jr = grid_j(PROBES_2D["robust_seed"], PROBES_2D["r"])
    assert jr.max() < -0.2, f"robust 2-D seed has grid max J {jr.max()}"
    jp = grid_j(PROBES_2D["ae_pocket_seed"], PROBES_2D["r"])
    frac = (jp >= 0).mean()
    assert 0.001 < frac < 0.2, f"AE-pocket seed fraction {frac} out of range"
    print(f"  probes ok: robust maxJ={jr.max():.3f}, pocket AE frac={frac:.4f}")


def calibrate_benchmark(model8: MlpModel):
    sue = ModelSue(model8, explainer="gxi", image_shape=(8, 8))
    spec = MisinterpretationSpec(region=Region.F_HAT, metric=Metric.INV_PCC,
                                 beta=1.0 / BENCH_PCC_THRESHOLD)
    seed = synthetic_seed(BENCH_SEED_INDEX)
    ball = NormBall(seed, BENCH_R, 0.0, 1.0)
    t0 = time.time()
    res = run_smc(sue, ball, spec, CALIBRATION_SAMPLES, RngSpec(0xCA11B, 0))
    took = time.time() - t0
    assert res.hits > 0, "calibration found no hits; retune the threshold"
    assert -12.5 < res.ln_p < -8.0, f"benchmark ln P {res.ln_p} outside the target band"
    doc = {
        "model": "toy8x8", "explainer": "gxi", "seed_index": BENCH_SEED_INDEX,
        "r": BENCH_R, "metric": "inv_pcc", "pcc_threshold": BENCH_PCC_THRESHOLD,
        "beta": 1.0 / BENCH_PCC_THRESHOLD,
        "smc": {"n_samples": res.n_samples, "hits": res.hits, "ln_p": res.ln_p,
                "delta2": res.delta2, "rng": {"seed": 0xCA11B, "stream": 0}},
    }
    (DATA / "benchmark_fhat.json").write_text(json.dumps(doc, indent=1) + "\n")
    print(f"  calibration: hits={res.hits} lnP={res.ln_p:.4f} delta2={res.delta2:.5f} "
          f"({took:.0f}s)")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--skip-calibration", action="store_true",
                        help="regenerate weights and goldens only")
    args = parser.parse_args()

    DATA.mkdir(parents=True, exist_ok=True)
    model8 = synth_model(TOY8X8, "toy8x8")
    model2 = synth_model(TOY2D, "toy2d")
    save_weights_file(model8, DATA / "toy8x8_weights.json")
    save_weights_file(model2, DATA / "toy2d_weights.json")
    (DATA / "toy2d_probes.json").write_text(json.dumps(PROBES_2D, indent=1) + "\n")
    print("wrote weights + probes")

    check_probes(model8, model2)
    write_goldens(model8, model2)
    print("wrote goldens")

    if not args.skip_calibration:
        calibrate_benchmark(model8)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
