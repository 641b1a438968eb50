"""Smoothness diagnostic: empirical Lipschitz-gradient bound check over a ball.

For a smooth loss the change |l(x') - l(x)| is bounded by
||grad l(x)|| * dist + (K/2) * dist^2 with dist the Euclidean distance and K a
bound on the input-Hessian norm. K here is an empirical sampled bound
(finite-difference Hessians maximized over ball samples, then inflated), so
the report is labelled empirical rather than certified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NormBall, sample_uniform_ball
from .errors import ContractViolation
from .mlp import (ACT_SOFTPLUS, MlpModel, cross_entropy_gradient, cross_entropy_loss,
                  logit_margin_gradient, logit_margin_loss, mlp_forward)
from .rng import RngSpec

_LOSSES = {
    "cross_entropy": (cross_entropy_loss, cross_entropy_gradient),
    "logit_margin": (logit_margin_loss, logit_margin_gradient),
}


@dataclass
class LipschitzReport:
    violations: int
    max_slack: float  # max over probes of |delta l| - bound; <= 0 means every probe satisfied it
    k_used: float
    grad_norm: float
    n_probe: int
    loss: str
    method: str = "empirical-sampled-k"


def _fd_hessian_norms(model: MlpModel, points: np.ndarray, label: int, loss: str,
                      step: float) -> np.ndarray:
    """Frobenius norms of central finite-difference Hessians at each point."""
    _, grad_fn = _LOSSES[loss]
    n, dim = points.shape
    eye = np.eye(dim)
    plus = (points[:, None, :] + step * eye).reshape(n * dim, dim)
    minus = (points[:, None, :] - step * eye).reshape(n * dim, dim)
    g_plus = grad_fn(model, plus, label).reshape(n, dim, dim)
    g_minus = grad_fn(model, minus, label).reshape(n, dim, dim)
    hess = (g_plus - g_minus) / (2.0 * step)
    return np.sqrt((hess ** 2).sum(axis=(1, 2)))


def lipschitz_bound_diagnostic(model: MlpModel, ball: NormBall, n_probe: int, rng: RngSpec,
                               loss: str = "cross_entropy", n_hessian_samples: int = 200,
                               inflation: float = 1.5, fd_step: float = 1e-4) -> LipschitzReport:
    """Check the quadratic growth bound at uniform ball probes; expects 0 violations."""
    if model.activation != ACT_SOFTPLUS:
        raise ContractViolation("the smoothness diagnostic needs a softplus model")
    if loss not in _LOSSES:
        raise ContractViolation(f"unknown loss {loss!r}; have {sorted(_LOSSES)}")
    loss_fn, grad_fn = _LOSSES[loss]
    center = ball.center
    label = int(np.argmax(mlp_forward(model, center, return_logits=True)))

    if ball.radius == 0:
        return LipschitzReport(violations=0, max_slack=0.0, k_used=0.0,
                               grad_norm=float(np.linalg.norm(grad_fn(model, center, label))),
                               n_probe=n_probe, loss=loss)

    hess_pts = sample_uniform_ball(ball, n_hessian_samples, rng.child(1))
    k_used = float(_fd_hessian_norms(model, hess_pts, label, loss, fd_step).max()) * inflation

    probes = sample_uniform_ball(ball, n_probe, rng.child(2))
    l_center = float(loss_fn(model, center, label))
    l_probes = loss_fn(model, probes, label)
    grad = grad_fn(model, center, label)
    grad_norm = float(np.linalg.norm(grad))
    dists = np.linalg.norm(probes - center, axis=1)
    bound = grad_norm * dists + 0.5 * k_used * dists ** 2
    slack = np.abs(l_probes - l_center) - bound
    return LipschitzReport(violations=int(np.count_nonzero(slack > 0)),
                           max_slack=float(slack.max()), k_used=k_used,
                           grad_norm=grad_norm, n_probe=n_probe, loss=loss)
