"""Standalone dense-network mirror of the toy weights-file format.

Used for cross-implementation equivalence runs: given the same weights JSON
(`{"shape": [...], "activation": ..., "beta_sp": ..., "softmax": ...,
"layers": [{"W": [[...]], "b": [...]}, ...]}`), classify and explain here
must match the evaluating side to float64 accuracy. Only softplus/relu dense
stacks and a gradient-times-input explainer are supported; that is all the
bundled toys need.
"""

from __future__ import annotations

import json

import numpy as np


class MirrorMlp:
    def __init__(self, layers, activation: str, beta_sp: float, softmax: bool):
        self.layers = [(np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64))
                       for w, b in layers]
        self.activation = activation
        self.beta_sp = float(beta_sp)
        self.softmax = bool(softmax)
        self.input_dim = self.layers[0][0].shape[1]
        self.num_classes = self.layers[-1][0].shape[0]

    def _act(self, z):
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        return np.logaddexp(0.0, self.beta_sp * z) / self.beta_sp

    def _act_grad(self, z):
        if self.activation == "relu":
            return (z > 0).astype(np.float64)
        return 0.5 * (1.0 + np.tanh(0.5 * self.beta_sp * z))

    def _forward(self, x):
        pre = []
        h = x
        last = len(self.layers) - 1
        for i, (w, b) in enumerate(self.layers):
            z = h @ w.T + b
            if i < last:
                pre.append(z)
                h = self._act(z)
            else:
                h = z
        return h, pre

    def classify(self, x: np.ndarray) -> np.ndarray:
        logits, _ = self._forward(np.asarray(x, dtype=np.float64))
        if not self.softmax:
            return logits
        shifted = logits - logits.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=-1, keepdims=True)

    def gradient_x_input(self, x: np.ndarray, target: str = "logit") -> np.ndarray:
        """Per-row gradient of the predicted class output, times the input."""
        x = np.asarray(x, dtype=np.float64)
        logits, pre = self._forward(x)
        n, c = logits.shape
        y = logits.argmax(axis=1)
        if target == "logit":
            g = np.zeros((n, c))
            g[np.arange(n), y] = 1.0
        else:
            shifted = logits - logits.max(axis=-1, keepdims=True)
            e = np.exp(shifted)
            p = e / e.sum(axis=-1, keepdims=True)
            pk = p[np.arange(n), y]
            g = -p * pk[:, None]
            g[np.arange(n), y] += pk
        for i in range(len(self.layers) - 1, -1, -1):
            w, _ = self.layers[i]
            g = g @ w
            if i > 0:
                g = g * self._act_grad(pre[i - 1])
        return x * g


def load_mirror(path) -> MirrorMlp:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    layers = [(layer["W"], layer["b"]) for layer in doc["layers"]]
    return MirrorMlp(layers, activation=doc["activation"],
                     beta_sp=float(doc.get("beta_sp", 1.0)), softmax=bool(doc["softmax"]))
