"""The fixed AdapterSpec behind the recorded conformance transcript."""

import numpy as np

from bridge_adapter.protocol import AdapterSpec

_W = np.array([[1.0, -2.0, 0.5], [0.25, 0.75, -1.0]])


def classify(x: np.ndarray) -> np.ndarray:
    return x @ _W.T


def explain(x: np.ndarray) -> np.ndarray:
    y = classify(x).argmax(axis=1)
    return x * _W[y]


def make_spec() -> AdapterSpec:
    return AdapterSpec(classify_fn=classify, explain_fn=explain, input_dim=3,
                       num_classes=2, explainer_name="linear-gxi", deterministic=True)
