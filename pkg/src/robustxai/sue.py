"""The black-box system-under-evaluation contract and bundled toy targets.

A SueHandle exposes batch classification and batch explanation plus a
monotone evaluation counter. Solvers only ever talk to this surface, so the
same code drives the bundled in-process models and out-of-process adapters.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ContractViolation
from .explainers import gradient_x_input, integrated_gradients, linear_surrogate, occlusion
from .mlp import MlpModel, load_weights_file, mlp_forward
from .rng import RngSpec


@dataclass
class EvalCounter:
    """Counts of points submitted to classify/explain, in submission order."""

    classify_points: int = 0
    explain_points: int = 0

    def total(self) -> int:
        return self.classify_points + self.explain_points


class SueHandle:
    """Informal protocol: batch classify/explain over flat float vectors."""

    input_dim: int
    num_classes: int
    deterministic: bool = True
    concurrent_safe: bool = True
    image_shape: tuple[int, int] | None = None

    def __init__(self):
        self.counter = EvalCounter()

    def classify_batch(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def explain_batch(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _noisy_gradient_x_input(model, x, amplitude: float = 1.0, frequency: float = 997.0,
                            target: str = "logit"):
    """gradient-times-input plus a deterministic input-dependent ripple.

    Exists to build hand-made "less robust" explainers for ranking fixtures;
    the ripple is a pure function of the input, so the SUE stays deterministic.
    """
    batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
    base = np.atleast_2d(gradient_x_input(model, batch, target=target))
    idx = np.arange(batch.shape[1])
    noise = amplitude * np.sin(frequency * batch * (idx + 1.0) + idx)
    maps = base + noise
    return maps if np.asarray(x).ndim > 1 else maps[0]


EXPLAINERS = {
    "gradient_x_input": gradient_x_input,
    "gxi": gradient_x_input,
    "integrated_gradients": integrated_gradients,
    "ig": integrated_gradients,
    "occlusion": occlusion,
    "linear_surrogate": linear_surrogate,
    "gxi_noisy": _noisy_gradient_x_input,
}


class ModelSue(SueHandle):
    """In-process SUE wrapping a dense model and one explainer."""

    def __init__(self, model: MlpModel, explainer: str = "gxi", target: str = "logit",
                 explainer_params: dict | None = None,
                 image_shape: tuple[int, int] | None = None):
        super().__init__()
        if explainer not in EXPLAINERS:
            raise ContractViolation(f"unknown explainer {explainer!r}; have {sorted(EXPLAINERS)}")
        self.model = model
        self.explainer_name = explainer
        self.target = target
        self.explainer_params = dict(explainer_params or {})
        self.input_dim = model.input_dim
        self.num_classes = model.num_classes
        self.image_shape = image_shape

    def classify_batch(self, x: np.ndarray) -> np.ndarray:
        batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if batch.shape[1] != self.input_dim:
            raise ContractViolation(f"input dim {batch.shape[1]} != {self.input_dim}")
        self.counter.classify_points += batch.shape[0]
        return np.atleast_2d(mlp_forward(self.model, batch))

    def explain_batch(self, x: np.ndarray) -> np.ndarray:
        batch = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if batch.shape[1] != self.input_dim:
            raise ContractViolation(f"input dim {batch.shape[1]} != {self.input_dim}")
        self.counter.explain_points += batch.shape[0]
        fn = EXPLAINERS[self.explainer_name]
        if self.explainer_name == "linear_surrogate":
            params = {"n_samples": 8 * self.input_dim, "perturb_scale": 0.05,
                      "rng": RngSpec(0x5AFE, 0), **self.explainer_params}
            maps = np.vstack([fn(self.model, row, target=self.target, **params) for row in batch])
        else:
            maps = np.atleast_2d(fn(self.model, batch, target=self.target, **self.explainer_params))
        if maps.shape != batch.shape:
            raise ContractViolation(f"explainer returned shape {maps.shape}, expected {batch.shape}")
        return maps


BUILTIN_WEIGHTS = {
    "toy8x8": "toy8x8_weights.json",
    "toy2d": "toy2d_weights.json",
}


def builtin_weights_path(name: str):
    """Filesystem path of a bundled weights file (also what adapters mirror)."""
    if name not in BUILTIN_WEIGHTS:
        raise ContractViolation(f"unknown builtin model {name!r}; have {sorted(BUILTIN_WEIGHTS)}")
    return resources.files("robustxai.data").joinpath(BUILTIN_WEIGHTS[name])


def load_builtin_model(name: str) -> MlpModel:
    if name == "linear2":
        # analytic 2-feature, 2-class linear logits used by closed-form tests
        w = np.array([[1.0, -2.0], [0.0, 0.0]])
        b = np.zeros(2)
        return MlpModel(layers=[(w, b)], activation="softplus", softmax=False, name="linear2")
    with resources.as_file(builtin_weights_path(name)) as path:
        model = load_weights_file(path)
    model.name = name
    return model


def make_builtin_sue(model: str = "toy8x8", explainer: str = "gxi", target: str = "logit",
                     explainer_params: dict | None = None) -> ModelSue:
    mdl = load_builtin_model(model)
    shape = (8, 8) if mdl.input_dim == 64 else None
    return ModelSue(mdl, explainer=explainer, target=target,
                    explainer_params=explainer_params, image_shape=shape)
