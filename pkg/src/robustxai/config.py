"""Run configuration: a single JSON document, validated with field-path diagnostics.

Field names mirror the usual symbols (r, rho, M, alpha, beta, N, itr) so run
files double as archival records of the hyper-parameters. The JSON schema
shipped at data/config.schema.json documents the full surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Metric, MisinterpretationSpec, Region
from .errors import ConfigError
from .ga import GaConfig
from .rng import RngSpec
from .subset import SsConfig
from .synthetic import synthetic_seeds

_SOLVER_KINDS = ("ga", "ss", "smc", "grid")


@dataclass
class RunConfig:
    target: dict
    seeds: np.ndarray  # (n_seeds, dim)
    r: float
    spec: MisinterpretationSpec
    solver: dict
    out: str
    master_seed: int
    clip: tuple[float, float] | None = (0.0, 1.0)
    standardize: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    def echo(self) -> dict:
        """The loaded document minus the output directory (kept out of report.json)."""
        doc = dict(self.raw)
        doc.pop("out", None)
        return doc


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise ConfigError(f"{path}{key}", "missing required field")
    return doc[key]


def _positive_real(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}") from None
    if not (np.isfinite(v) and v > 0):
        raise ConfigError(path, f"must be a positive finite real, got {value!r}")
    return v


def _load_seeds(block, base: Path) -> np.ndarray:
    if not isinstance(block, dict) or len(block) != 1:
        raise ConfigError("seeds", "expected exactly one of {synthetic, inline, file}")
    kind, value = next(iter(block.items()))
    if kind == "synthetic":
        if not isinstance(value, int) or value < 1:
            raise ConfigError("seeds.synthetic", "expected a positive integer count")
        return synthetic_seeds(value)
    if kind == "inline":
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim != 2:
            raise ConfigError("seeds.inline", "expected a list of flat feature vectors")
        return arr
    if kind == "file":
        path = (base / value).resolve() if not Path(value).is_absolute() else Path(value)
        if not path.exists():
            raise ConfigError("seeds.file", f"file does not exist: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            arr = np.asarray(json.load(fh), dtype=np.float64)
        if arr.ndim != 2:
            raise ConfigError("seeds.file", "expected a JSON list of flat feature vectors")
        return arr
    raise ConfigError(f"seeds.{kind}", "unknown seed source")


def _validate_target(target, path="target") -> dict:
    if not isinstance(target, dict):
        raise ConfigError(path, "expected an object")
    has_model = "model" in target
    has_cmd = "bridge_command" in target
    has_addr = "bridge_address" in target
    if sum([has_model, has_cmd, has_addr]) != 1:
        raise ConfigError(path, "exactly one of model / bridge_command / bridge_address")
    if has_model and not ("explainer" in target or "explainers" in target):
        raise ConfigError(f"{path}.explainer", "missing required field")
    if "explainers" in target:
        ex = target["explainers"]
        if not isinstance(ex, list) or len(ex) < 2:
            raise ConfigError(f"{path}.explainers", "ranking needs at least 2 explainers")
    if has_cmd and not (isinstance(target["bridge_command"], list) and target["bridge_command"]):
        raise ConfigError(f"{path}.bridge_command", "expected a non-empty argv list")
    return target


def _validate_solver(block) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("solver", "expected an object")
    kind = _need(block, "kind", "solver.")
    if kind not in _SOLVER_KINDS:
        raise ConfigError("solver.kind", f"must be one of {_SOLVER_KINDS}, got {kind!r}")
    if kind == "smc":
        n = _need(block, "n_samples", "solver.")
        if not isinstance(n, int) or n < 1:
            raise ConfigError("solver.n_samples", "expected a positive integer")
    if kind == "grid":
        res = _need(block, "resolution", "solver.")
        if not isinstance(res, int) or res < 11:
            raise ConfigError("solver.resolution", "expected an integer >= 11")
    return block


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError("config", f"file does not exist: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from None
    return parse_config(doc, base=path.parent)


def parse_config(doc: dict, base: Path = Path(".")) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be an object")
    target = _validate_target(_need(doc, "target", ""))
    seeds = _load_seeds(_need(doc, "seeds", ""), base)
    r = _positive_real(_need(doc, "radius" if "radius" in doc else "r", ""), "r")
    region_raw = _need(doc, "region", "")
    try:
        region = Region(region_raw)
    except ValueError:
        raise ConfigError("region", f"must be 'f_hat' or 'f_tilde', got {region_raw!r}") from None
    try:
        metric = Metric(doc.get("metric", "inv_pcc"))
    except ValueError:
        raise ConfigError("metric", f"unknown metric {doc.get('metric')!r}") from None
    kwargs = {}
    if "alpha" in doc:
        kwargs["alpha"] = _positive_real(doc["alpha"], "alpha")
    if "beta" in doc:
        kwargs["beta"] = _positive_real(doc["beta"], "beta")
    try:
        spec = MisinterpretationSpec(region=region, metric=metric, **kwargs)
    except ValueError as exc:
        raise ConfigError("alpha", str(exc)) from None
    solver = _validate_solver(_need(doc, "solver", ""))
    clip = doc.get("clip", [0.0, 1.0])
    if clip is not None:
        if (not isinstance(clip, (list, tuple))) or len(clip) != 2:
            raise ConfigError("clip", "expected [lower, upper] or null")
        clip = (float(clip[0]), float(clip[1]))
    master_seed = doc.get("master_seed", 0)
    if not isinstance(master_seed, int):
        raise ConfigError("master_seed", "expected an integer")
    return RunConfig(target=target, seeds=seeds, r=r, spec=spec, solver=solver,
                     out=str(doc.get("out", "out")), master_seed=master_seed,
                     clip=clip, standardize=bool(doc.get("standardize", False)), raw=doc)


def ga_config_from(block: dict, rng: RngSpec) -> GaConfig:
    try:
        return GaConfig(
            population_size=int(block.get("N", 1000)),
            max_iterations=int(block.get("itr", 500)),
            mutation_rate=float(block.get("mutation_rate", 0.01)),
            mutation_scale=float(block.get("mutation_scale", 0.25)),
            plateau_window=int(block.get("plateau_window", 50)),
            plateau_tol=float(block.get("plateau_tol", 1e-4)),
            shift_epsilon=float(block.get("shift_epsilon", 1e-6)),
            pool_policy=str(block.get("pool_policy", "truncate")),
            max_individuals=block.get("max_individuals"),
            rng=rng,
        )
    except ValueError as exc:
        raise ConfigError("solver", str(exc)) from None


def ss_config_from(block: dict, rng: RngSpec, mh_steps: int | None = None) -> SsConfig:
    try:
        return SsConfig(
            samples_per_level=int(block.get("N", 1000)),
            quantile=float(block.get("rho", 0.1)),
            mh_steps=int(mh_steps if mh_steps is not None else block.get("M", 250)),
            ln_p_min=float(block.get("ln_p_min", -100.0)),
            proposal_scale=float(block.get("proposal_scale", 0.5)),
            target_acceptance=float(block.get("target_acceptance", 0.234)),
            adapt_every=int(block.get("adapt_every", 25)),
            lambda_cov=float(block.get("lambda_cov", 0.0)),
            max_witnesses=int(block.get("max_witnesses", 10)),
            rng=rng,
        )
    except ValueError as exc:
        raise ConfigError("solver", str(exc)) from None
