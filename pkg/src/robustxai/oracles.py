"""Brute-force ground truth: plain Monte Carlo estimates and exhaustive 2-D grids.

These are the independent baselines the solvers are validated against; they
share nothing with the GA/SS machinery beyond the SUE surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MisinterpretationSpec, NormBall, Region, sample_uniform_ball
from .errors import ContractViolation
from .evaluation import SeedEvaluator
from .rng import RngSpec
from .sue import SueHandle

_BLOCK = 100_000


@dataclass
class SmcResult:
    p_hat: float
    ln_p: float  # -inf flags zero hits
    hits: int
    n_samples: int
    cov: float | None  # undefined (None) when no hits were seen
    delta2: float | None

    @property
    def zero_hits(self) -> bool:
        return self.hits == 0


def _smc_counts(ball: NormBall, indicator_fn, n_samples: int, rng: RngSpec,
                block: int) -> int:
    hits = 0
    done = 0
    block_index = 0
    while done < n_samples:
        take = min(block, n_samples - done)
        pts = sample_uniform_ball(ball, take, rng.child(block_index))
        hits += int(np.count_nonzero(indicator_fn(pts)))
        done += take
        block_index += 1
    return hits


def _smc_result(hits: int, n_samples: int) -> SmcResult:
    p_hat = hits / n_samples
    if hits == 0:
        return SmcResult(p_hat=0.0, ln_p=-math.inf, hits=0, n_samples=n_samples,
                         cov=None, delta2=None)
    delta2 = (1.0 - p_hat) / (p_hat * n_samples)
    return SmcResult(p_hat=p_hat, ln_p=math.log(p_hat), hits=hits, n_samples=n_samples,
                     cov=math.sqrt(delta2), delta2=delta2)


def run_smc(sue: SueHandle, ball: NormBall, spec: MisinterpretationSpec, n_samples: int,
            rng: RngSpec, block: int = _BLOCK) -> SmcResult:
    """Uniform-ball hit counting of the misinterpretation region."""
    if n_samples < 1:
        raise ContractViolation("n_samples must be >= 1")
    if ball.radius <= 0:
        raise ContractViolation("plain Monte Carlo needs a ball with positive radius")
    ev = SeedEvaluator(sue, ball, spec)
    hits = _smc_counts(ball, ev.hits, n_samples, rng, block)
    return _smc_result(hits, n_samples)


def run_smc_event(ball: NormBall, event_fn, n_samples: int, rng: RngSpec,
                  block: int = _BLOCK) -> SmcResult:
    """Same estimator for an arbitrary vectorized event on the ball."""
    if n_samples < 1:
        raise ContractViolation("n_samples must be >= 1")
    hits = _smc_counts(ball, event_fn, n_samples, rng, block)
    return _smc_result(hits, n_samples)


@dataclass
class WorstCaseSample:
    point: np.ndarray
    d: float
    j: float


def smc_worst_case(sue: SueHandle, ball: NormBall, spec: MisinterpretationSpec,
                   n_samples: int, rng: RngSpec, block: int = _BLOCK) -> WorstCaseSample | None:
    """Best constrained sample found by plain random search (the naive baseline).

    Preserved-prediction region: feasible means J < 0 and best means largest D.
    Flipped-prediction region: feasible means J >= 0 and best means smallest D.
    """
    if ball.radius <= 0:
        raise ContractViolation("random search needs a ball with positive radius")
    ev = SeedEvaluator(sue, ball, spec)
    maximize = spec.region is Region.F_HAT
    best: WorstCaseSample | None = None
    done = 0
    block_index = 0
    while done < n_samples:
        take = min(block, n_samples - done)
        pts = sample_uniform_ball(ball, take, rng.child(block_index))
        j, d = ev.jd_batch(pts)
        feas = (j < 0) if maximize else (j >= 0)
        if np.any(feas):
            masked = np.where(feas, d, -np.inf if maximize else np.inf)
            idx = int(masked.argmax() if maximize else masked.argmin())
            better = (best is None or
                      (maximize and d[idx] > best.d) or (not maximize and d[idx] < best.d))
            if better:
                best = WorstCaseSample(point=pts[idx].copy(), d=float(d[idx]), j=float(j[idx]))
        done += take
        block_index += 1
    return best


@dataclass
class GridResult:
    best_point: np.ndarray | None
    best_d: float
    feasible: np.ndarray  # (resolution, resolution) constraint map
    xs: np.ndarray
    ys: np.ndarray
    d_grid: np.ndarray
    j_grid: np.ndarray


def grid_worst_case(sue: SueHandle, ball: NormBall, spec: MisinterpretationSpec,
                    resolution: int, block: int = _BLOCK) -> GridResult:
    """Exhaustive lattice search over a 2-input ball; the GA's independent oracle.

    Odd resolutions put the center on the lattice and make (2n - 1)-point
    refinements nested supersets.
    """
    if sue.input_dim != 2 or ball.dim != 2:
        raise ContractViolation("the grid oracle is restricted to 2 inputs")
    if resolution < 11:
        raise ContractViolation("resolution must be >= 11")
    if ball.radius <= 0:
        raise ContractViolation("grid search needs a ball with positive radius")
    ev = SeedEvaluator(sue, ball, spec)
    lo, hi = ball.bounds()
    xs = np.linspace(lo[0], hi[0], resolution)
    ys = np.linspace(lo[1], hi[1], resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    j = np.empty(pts.shape[0])
    d = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], block):
        sl = slice(start, min(start + block, pts.shape[0]))
        j[sl], d[sl] = ev.jd_batch(pts[sl])
    maximize = spec.region is Region.F_HAT
    feas = (j < 0) if maximize else (j >= 0)
    if not np.any(feas):
        best_point, best_d = None, math.nan
    else:
        masked = np.where(feas, d, -np.inf if maximize else np.inf)
        idx = int(masked.argmax() if maximize else masked.argmin())
        best_point, best_d = pts[idx].copy(), float(d[idx])
    shape = (resolution, resolution)
    return GridResult(best_point=best_point, best_d=best_d, feasible=feas.reshape(shape),
                      xs=xs, ys=ys, d_grid=d.reshape(shape), j_grid=j.reshape(shape))
