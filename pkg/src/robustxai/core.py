"""Shared vocabulary: perturbation boxes, prediction margins, misinterpretation membership.

Points are plain 1-D float64 arrays. A NormBall is the L-infinity box of radius r
around a center, optionally intersected with per-feature domain bounds (images
live in [0, 1]). The prediction loss J is the margin of the best wrong class over
the seed's class; J >= 0 marks an adversarial example.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ContractViolation
from .rng import RngSpec, as_generator


class Region(str, Enum):
    # F_HAT: prediction preserved, explanation drifted.  F_TILDE: prediction
    # flipped, explanation preserved.
    F_HAT = "f_hat"
    F_TILDE = "f_tilde"


class Metric(str, Enum):
    INV_PCC = "inv_pcc"
    INV_SSIM = "inv_ssim"
    MSE = "mse"


@dataclass(frozen=True)
class MisinterpretationSpec:
    """Region definition with discrepancy metric and consistency thresholds.

    D < alpha counts as a consistent explanation, D > beta as an inconsistent
    one. Defaults follow the correlation rule of thumb (PCC > 0.6 consistent,
    PCC < 0.4 inconsistent) expressed in inverse form.
    """

    region: Region
    metric: Metric = Metric.INV_PCC
    alpha: float = 1.0 / 0.6
    beta: float = 1.0 / 0.4

    def __post_init__(self):
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise ContractViolation("alpha must be a positive finite real")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise ContractViolation("beta must be a positive finite real")
        if self.alpha > self.beta:
            raise ContractViolation(f"alpha ({self.alpha}) must not exceed beta ({self.beta})")


def as_point(values, dim: int | None = None) -> np.ndarray:
    """Validate and convert a feature vector to a 1-D float64 array."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ContractViolation(f"point must be 1-D, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ContractViolation(f"point has dim {x.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(x)):
        raise ContractViolation("point contains non-finite values")
    return x


@dataclass(frozen=True)
class NormBall:
    """L-infinity box of radius `radius` around `center`, clipped to the data domain.

    A zero radius degenerates to the single center point; solvers that need a
    proper search volume validate radius > 0 themselves.
    """

    center: np.ndarray
    radius: float
    lower_clip: np.ndarray | float | None = None
    upper_clip: np.ndarray | float | None = None

    def __post_init__(self):
        center = as_point(self.center)
        object.__setattr__(self, "center", center)
        if not (np.isfinite(self.radius) and self.radius >= 0):
            raise ContractViolation(f"radius must be a nonnegative real, got {self.radius}")
        for name in ("lower_clip", "upper_clip"):
            raw = getattr(self, name)
            if raw is None:
                continue
            arr = np.broadcast_to(np.asarray(raw, dtype=np.float64), center.shape).copy()
            object.__setattr__(self, name, arr)
        if self.lower_clip is not None and np.any(self.lower_clip > center):
            raise ContractViolation("lower_clip must lie at or below the center componentwise")
        if self.upper_clip is not None and np.any(self.upper_clip < center):
            raise ContractViolation("upper_clip must lie at or above the center componentwise")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise bounds of the feasible box (ball intersected with clips)."""
        lo = self.center - self.radius
        hi = self.center + self.radius
        if self.lower_clip is not None:
            lo = np.maximum(lo, self.lower_clip)
        if self.upper_clip is not None:
            hi = np.minimum(hi, self.upper_clip)
        return lo, hi

    def contains(self, points: np.ndarray, atol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lo, hi = self.bounds()
        ok = np.all((pts >= lo - atol) & (pts <= hi + atol), axis=1)
        return ok if np.asarray(points).ndim > 1 else bool(ok[0])


def prediction_loss(seed_probs, pert_probs) -> float:
    """Margin of the best wrong class over the seed class: max_{i != y} p_i - p_y."""
    return float(prediction_loss_batch(seed_probs, np.atleast_2d(pert_probs))[0])


def prediction_loss_batch(seed_probs, pert_probs: np.ndarray) -> np.ndarray:
    seed = np.asarray(seed_probs, dtype=np.float64)
    pert = np.atleast_2d(np.asarray(pert_probs, dtype=np.float64))
    if seed.ndim != 1 or seed.shape[0] < 2:
        raise ContractViolation("seed prediction must be a vector of at least 2 class scores")
    if pert.shape[1] != seed.shape[0]:
        raise ContractViolation(
            f"class-score length mismatch: seed {seed.shape[0]}, perturbed {pert.shape[1]}"
        )
    if not (np.all(np.isfinite(seed)) and np.all(np.isfinite(pert))):
        raise ContractViolation("class scores must be finite")
    y = int(np.argmax(seed))
    others = np.delete(pert, y, axis=1)
    return others.max(axis=1) - pert[:, y]


def classification_indicator(j: float) -> int:
    """-1 when the perturbed point is adversarial (J >= 0), otherwise +1."""
    if not np.isfinite(j):
        raise ContractViolation(f"J must be finite, got {j}")
    return -1 if j >= 0 else 1


def classification_indicator_batch(j_values: np.ndarray) -> np.ndarray:
    j = np.asarray(j_values, dtype=np.float64)
    if not np.all(np.isfinite(j)):
        raise ContractViolation("J values must be finite")
    return np.where(j >= 0, -1.0, 1.0)


def region_membership(spec: MisinterpretationSpec, d: float, j: float) -> bool:
    return bool(region_membership_batch(spec, np.asarray([d]), np.asarray([j]))[0])


def region_membership_batch(spec: MisinterpretationSpec, d: np.ndarray, j: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ContractViolation("discrepancy values must be finite and nonnegative")
    if not np.all(np.isfinite(j)):
        raise ContractViolation("J values must be finite")
    if spec.region is Region.F_HAT:
        return (d > spec.beta) & (j < 0)
    return (d < spec.alpha) & (j >= 0)


def sample_uniform_ball(ball: NormBall, n: int, rng: RngSpec | np.random.Generator) -> np.ndarray:
    """n points uniform over the feasible box; deterministic for a fixed RngSpec."""
    if n < 1:
        raise ContractViolation(f"sample count must be >= 1, got {n}")
    gen = as_generator(rng)
    lo, hi = ball.bounds()
    return gen.uniform(lo, hi, size=(n, ball.dim))


def project_to_ball(points: np.ndarray, ball: NormBall) -> np.ndarray:
    """Componentwise clamp into the feasible box; idempotent."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[-1] != ball.dim:
        raise ContractViolation(f"point dim {pts.shape[-1]} does not match ball dim {ball.dim}")
    lo, hi = ball.bounds()
    return np.clip(pts, lo, hi)
