"""Dense MLP stand-in models: forward pass, exact input gradients, weights file IO.

The toolkit ships deterministic toy networks so every solver is testable
offline. Gradients are hand-rolled reverse mode over the dense layers, so the
whole stack stays numpy-only and bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

ACT_RELU = "relu"
ACT_SOFTPLUS = "softplus"


@dataclass
class MlpModel:
    """Dense feed-forward classifier. layers holds (W, b) with W of shape (out, in)."""

    layers: list[tuple[np.ndarray, np.ndarray]]
    activation: str = ACT_SOFTPLUS
    beta_sp: float = 1.0
    softmax: bool = True
    name: str = field(default="mlp", compare=False)

    def __post_init__(self):
        if self.activation not in (ACT_RELU, ACT_SOFTPLUS):
            raise ContractViolation(f"unknown activation {self.activation!r}")
        if self.beta_sp <= 0:
            raise ContractViolation("beta_sp must be positive")
        if not self.layers:
            raise ContractViolation("model needs at least one layer")
        norm = []
        prev_out = None
        for i, (w, b) in enumerate(self.layers):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ContractViolation(f"layer {i} has inconsistent shapes {w.shape}, {b.shape}")
            if prev_out is not None and w.shape[1] != prev_out:
                raise ContractViolation(f"layer {i} input {w.shape[1]} != previous output {prev_out}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ContractViolation(f"layer {i} has non-finite weights")
            prev_out = w.shape[0]
            norm.append((w, b))
        self.layers = norm

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def num_classes(self) -> int:
        return self.layers[-1][0].shape[0]

    @property
    def shape(self) -> list[int]:
        return [self.input_dim] + [w.shape[0] for w, _ in self.layers]


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _act(model: MlpModel, z: np.ndarray) -> np.ndarray:
    if model.activation == ACT_RELU:
        return np.maximum(z, 0.0)
    return np.logaddexp(0.0, model.beta_sp * z) / model.beta_sp


def _act_grad(model: MlpModel, z: np.ndarray) -> np.ndarray:
    if model.activation == ACT_RELU:
        return (z > 0).astype(np.float64)
    # sigmoid(beta * z), numerically stable
    return 0.5 * (1.0 + np.tanh(0.5 * model.beta_sp * z))


def _forward_cached(model: MlpModel, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    pre_acts = []
    h = x
    last = len(model.layers) - 1
    for i, (w, b) in enumerate(model.layers):
        z = h @ w.T + b
        if i < last:
            pre_acts.append(z)
            h = _act(model, z)
        else:
            h = z
    return h, pre_acts


def mlp_forward(model: MlpModel, x, return_logits: bool = False) -> np.ndarray:
    """Batch or single forward pass; softmax applied when the model flag is set."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    batch = np.atleast_2d(arr)
    if batch.shape[1] != model.input_dim:
        raise ContractViolation(f"input dim {batch.shape[1]} != model dim {model.input_dim}")
    logits, _ = _forward_cached(model, batch)
    out = logits if (return_logits or not model.softmax) else _softmax(logits)
    return out[0] if single else out


def _backward_from_logits(model: MlpModel, pre_acts: list[np.ndarray],
                          cotangent: np.ndarray) -> np.ndarray:
    g = cotangent
    for i in range(len(model.layers) - 1, -1, -1):
        w, _ = model.layers[i]
        g = g @ w
        if i > 0:
            g = g * _act_grad(model, pre_acts[i - 1])
    return g


def mlp_input_gradient(model: MlpModel, x, class_index, target: str = "logit") -> np.ndarray:
    """Exact reverse-mode gradient of one class output with respect to the input.

    target selects the pre-softmax logit (default) or the softmax probability.
    class_index may be a scalar or one index per batch row.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    batch = np.atleast_2d(arr)
    if batch.shape[1] != model.input_dim:
        raise ContractViolation(f"input dim {batch.shape[1]} != model dim {model.input_dim}")
    n, c = batch.shape[0], model.num_classes
    idx = np.broadcast_to(np.asarray(class_index, dtype=np.int64), (n,))
    if np.any(idx < 0) or np.any(idx >= c):
        raise ContractViolation(f"class index out of range [0, {c})")
    logits, pre_acts = _forward_cached(model, batch)
    if target == "logit":
        cot = np.zeros((n, c))
        cot[np.arange(n), idx] = 1.0
    elif target == "prob":
        p = _softmax(logits)
        pk = p[np.arange(n), idx]
        cot = -p * pk[:, None]
        cot[np.arange(n), idx] += pk
    else:
        raise ContractViolation(f"unknown gradient target {target!r}")
    grad = _backward_from_logits(model, pre_acts, cot)
    return grad[0] if single else grad


def cross_entropy_loss(model: MlpModel, x, label: int) -> np.ndarray:
    """-log p_label, stable via log-sum-exp on the logits."""
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    logits, _ = _forward_cached(model, batch)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    out = log_z - logits[:, label]
    return out if np.asarray(x).ndim > 1 else out[0]


def cross_entropy_gradient(model: MlpModel, x, label: int) -> np.ndarray:
    """Input gradient of -log p_label (cotangent p - onehot on the logits)."""
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    logits, pre_acts = _forward_cached(model, batch)
    cot = _softmax(logits)
    cot[:, label] -= 1.0
    grad = _backward_from_logits(model, pre_acts, cot)
    return grad if np.asarray(x).ndim > 1 else grad[0]


def logit_margin_loss(model: MlpModel, x, label: int) -> np.ndarray:
    """max_{i != label} z_i - z_label on the pre-softmax logits."""
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    logits, _ = _forward_cached(model, batch)
    others = np.delete(logits, label, axis=1)
    out = others.max(axis=1) - logits[:, label]
    return out if np.asarray(x).ndim > 1 else out[0]


def logit_margin_gradient(model: MlpModel, x, label: int) -> np.ndarray:
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    logits, pre_acts = _forward_cached(model, batch)
    masked = logits.copy()
    masked[:, label] = -np.inf
    runner_up = masked.argmax(axis=1)
    n, c = logits.shape
    cot = np.zeros((n, c))
    cot[np.arange(n), runner_up] = 1.0
    cot[:, label] -= 1.0
    grad = _backward_from_logits(model, pre_acts, cot)
    return grad if np.asarray(x).ndim > 1 else grad[0]


# --- weights file -----------------------------------------------------------
#
# JSON text document with decimal floats at 17 significant digits, which
# round-trips float64 exactly:
#   {"shape": [...], "activation": "softplus", "beta_sp": 1, "layers":
#    [{"W": [[...]], "b": [...]}, ...], "softmax": true}

def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _vec17(v: np.ndarray) -> str:
    return "[" + ", ".join(_f17(x) for x in v) + "]"


def dumps_weights(model: MlpModel) -> str:
    parts = ["{\n"]
    parts.append(f'  "shape": {json.dumps(model.shape)},\n')
    parts.append(f'  "activation": {json.dumps(model.activation)},\n')
    parts.append(f'  "beta_sp": {_f17(model.beta_sp)},\n')
    parts.append(f'  "softmax": {json.dumps(model.softmax)},\n')
    parts.append('  "layers": [\n')
    layer_blobs = []
    for w, b in model.layers:
        rows = ",\n      ".join(_vec17(row) for row in w)
        layer_blobs.append('    {"W": [\n      ' + rows + '\n    ], "b": ' + _vec17(b) + "}")
    parts.append(",\n".join(layer_blobs))
    parts.append("\n  ]\n}\n")
    return "".join(parts)


def save_weights_file(model: MlpModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_weights(model))


def load_weights_file(path) -> MlpModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    layers = [(np.array(layer["W"], dtype=np.float64), np.array(layer["b"], dtype=np.float64))
              for layer in doc["layers"]]
    model = MlpModel(layers=layers, activation=doc["activation"],
                     beta_sp=float(doc.get("beta_sp", 1.0)), softmax=bool(doc["softmax"]))
    declared = [int(s) for s in doc["shape"]]
    if model.shape != declared:
        raise ContractViolation(f"declared shape {declared} != layer shapes {model.shape}")
    return model
