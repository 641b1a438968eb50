"""Feature-attribution explainers for dense models.

Two gradient-based variants (gradient-times-input, integrated gradients) and
two perturbation-based variants (occlusion, local linear surrogate). All
attribute the predicted class of the input being explained; the attribution
target is the pre-softmax logit by default.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation, SurrogateRankError
from .mlp import MlpModel, mlp_forward, mlp_input_gradient
from .rng import RngSpec, as_generator


def predicted_classes(model: MlpModel, x: np.ndarray) -> np.ndarray:
    return np.atleast_2d(mlp_forward(model, x, return_logits=True)).argmax(axis=1)


def _selected_output(model: MlpModel, x: np.ndarray, idx: np.ndarray, target: str) -> np.ndarray:
    out = mlp_forward(model, x, return_logits=(target == "logit"))
    out = np.atleast_2d(out)
    return out[np.arange(out.shape[0]), idx]


def gradient_x_input(model: MlpModel, x, target: str = "logit") -> np.ndarray:
    """x * d f_y(x) / dx with y the predicted class of each row."""
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = predicted_classes(model, batch)
    maps = batch * mlp_input_gradient(model, batch, y, target=target)
    return maps if np.asarray(x).ndim > 1 else maps[0]


def integrated_gradients(model: MlpModel, x, baseline=None, steps: int = 64,
                         target: str = "logit") -> np.ndarray:
    """Midpoint-rule path integral of the gradient from the baseline to x.

    Exact for linear outputs at any step count; the midpoint rule converges at
    O(steps^-2) otherwise.
    """
    if steps < 1:
        raise ContractViolation("integrated gradients needs steps >= 1")
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if baseline is None:
        base = np.zeros(batch.shape[1])
    else:
        base = np.broadcast_to(np.asarray(baseline, dtype=np.float64), batch.shape[1:]).ravel()
        if base.shape[0] != batch.shape[1]:
            raise ContractViolation("baseline dim does not match input dim")
    y = predicted_classes(model, batch)
    delta = batch - base
    total = np.zeros_like(batch)
    for k in range(steps):
        alpha = (k + 0.5) / steps
        total += mlp_input_gradient(model, base + alpha * delta, y, target=target)
    maps = delta * (total / steps)
    return maps if np.asarray(x).ndim > 1 else maps[0]


def occlusion(model: MlpModel, x, baseline_value: float = 0.0,
              target: str = "logit") -> np.ndarray:
    """attribution_i = f_y(x) - f_y(x with feature i replaced by the baseline value)."""
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n, dim = batch.shape
    y = predicted_classes(model, batch)
    occluded = np.repeat(batch, dim, axis=0)
    occluded[np.arange(n * dim), np.tile(np.arange(dim), n)] = baseline_value
    # reference rows ride in the same forward batch so an already-baseline
    # feature attributes exactly zero (identical rounding path)
    stacked = np.vstack([batch, occluded])
    idx = np.concatenate([y, np.repeat(y, dim)])
    out = _selected_output(model, stacked, idx, target)
    ref, vals = out[:n], out[n:].reshape(n, dim)
    maps = ref[:, None] - vals
    return maps if np.asarray(x).ndim > 1 else maps[0]


def linear_surrogate(model: MlpModel, x, n_samples: int, perturb_scale: float,
                     rng: RngSpec, target: str = "logit") -> np.ndarray:
    """Least-squares coefficients of a local linear fit to f_y around x.

    The sample stream is keyed by the point content, so the same point explained
    in different batches gets the same map.
    """
    point = np.asarray(x, dtype=np.float64).ravel()
    dim = point.shape[0]
    if n_samples <= dim:
        raise SurrogateRankError(f"n_samples ({n_samples}) must exceed input dim ({dim})")
    gen = as_generator(rng.child_from_bytes(point.tobytes()))
    deltas = gen.uniform(-perturb_scale, perturb_scale, size=(n_samples, dim))
    samples = point + deltas
    y = int(predicted_classes(model, point[None, :])[0])
    targets = _selected_output(model, samples, np.full(n_samples, y), target)
    design = np.hstack([np.ones((n_samples, 1)), deltas])
    coef, _, rank, _ = np.linalg.lstsq(design, targets, rcond=None)
    if rank < dim + 1:
        raise SurrogateRankError(f"design matrix rank {rank} < {dim + 1}")
    return coef[1:]
