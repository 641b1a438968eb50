"""Genetic-algorithm solver for the two constrained worst-case problems.

SOL_FHAT maximizes the explanation discrepancy D subject to the prediction
being preserved (J < 0). SOL_FTILDE minimizes D over adversarial examples
(J >= 0); because adversarial points are rare under random sampling, it runs
a first phase that climbs J until more than half the pool is adversarial,
then switches to refining D.

Feasibility is encoded in the fitness sign so constraint violators are
suppressed by proportionate selection rather than discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import MisinterpretationSpec, NormBall, Region, project_to_ball, sample_uniform_ball
from .errors import ContractViolation
from .evaluation import SeedEvaluator
from .rng import RngSpec, as_generator
from .sue import SueHandle

_D_FLOOR = 1e-300  # keeps 1/D finite at exactly-zero discrepancy


class GaProblem(str, Enum):
    SOL_FHAT = "sol_fhat"
    SOL_FTILDE = "sol_ftilde"


class GaPhase(str, Enum):
    SEEK_AE = "seek_ae"
    REFINE = "refine"


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 1000
    max_iterations: int = 500
    mutation_rate: float = 0.01
    mutation_scale: float = 0.25
    plateau_window: int = 50
    plateau_tol: float = 1e-4
    shift_epsilon: float = 1e-6
    pool_policy: str = "truncate"
    max_individuals: int | None = None
    rng: RngSpec = RngSpec(0)

    def __post_init__(self):
        n = self.population_size
        if n < 4 or n % 2 != 0:
            raise ContractViolation(f"population_size must be even and >= 4, got {n}")
        if not (0.0 <= self.mutation_rate <= 1.0):
            raise ContractViolation("mutation_rate must be in [0, 1]")
        if not (0.0 <= self.mutation_scale <= 1.0):
            raise ContractViolation("mutation_scale must be in [0, 1]")
        if self.pool_policy not in ("truncate", "union"):
            raise ContractViolation("pool_policy must be 'truncate' or 'union'")
        if self.plateau_window < 1 or self.plateau_tol < 0:
            raise ContractViolation("plateau parameters out of range")


@dataclass
class Individual:
    point: np.ndarray
    j: float
    d: float
    fitness: float
    feasible: bool


@dataclass
class GaResult:
    best: Individual | None
    no_feasible: bool
    objective_trace: list[float] = field(default_factory=list)
    constraint_trace: list[float] = field(default_factory=list)
    evaluations_used: int = 0
    individuals_evaluated: int = 0
    terminated_by: str = "budget"
    phase_switch_iteration: int | None = None
    iterations: int = 0


def fitness_fhat(i_c: float, d: float) -> float:
    """Signed discrepancy I_c * D; positive exactly for feasible points."""
    if d < 0 or not np.isfinite(d):
        raise ContractViolation("D must be finite and nonnegative")
    return float(i_c) * float(d)


def fitness_ftilde(phase: GaPhase, j: float, i_c: float, d: float) -> float:
    """Phase 1 climbs the margin itself; phase 2 scores -I_c/D (+1/D for AEs)."""
    if GaPhase(phase) is GaPhase.SEEK_AE:
        return float(j)
    if d == 0:
        raise ContractViolation("D must be positive in the refinement phase")
    return -float(i_c) / float(d)


def selection_weights(fitnesses: np.ndarray, shift_epsilon: float, shift: bool = True) -> np.ndarray:
    f = np.asarray(fitnesses, dtype=np.float64)
    if shift:
        w = f - f.min() + shift_epsilon
    else:
        if np.any(f <= 0):
            raise ContractViolation("proportionate selection without shift needs positive fitness")
        w = f.copy()
    total = w.sum()
    if total <= 0 or not np.isfinite(total):
        return np.full(f.shape[0], 1.0 / f.shape[0])
    return w / total


def select_parents(fitnesses: np.ndarray, count: int, shift_epsilon: float,
                   rng: RngSpec | np.random.Generator, shift: bool = True) -> np.ndarray:
    """Sample `count` indices with replacement, proportional to shifted fitness."""
    if count < 2:
        raise ContractViolation("parent count must be >= 2")
    gen = as_generator(rng)
    p = selection_weights(fitnesses, shift_epsilon, shift=shift)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, gen.random(count), side="right")


def crossover_with_mask(parent_a: np.ndarray, parent_b: np.ndarray,
                        mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    child_a = parent_a.copy()
    child_b = parent_b.copy()
    child_a[mask] = parent_b[mask]
    child_b[mask] = parent_a[mask]
    return child_a, child_b


def crossover(parent_a: np.ndarray, parent_b: np.ndarray,
              rng: RngSpec | np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Swap a uniformly chosen index subset of size floor(dim/2) between the parents."""
    a = np.asarray(parent_a, dtype=np.float64)
    b = np.asarray(parent_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractViolation("parents must have equal dims")
    gen = as_generator(rng)
    k = a.shape[0] // 2
    mask = np.zeros(a.shape[0], dtype=bool)
    mask[gen.permutation(a.shape[0])[:k]] = True
    return crossover_with_mask(a, b, mask)


def mutate(child: np.ndarray, ball: NormBall, rate: float, scale: float,
           rng: RngSpec | np.random.Generator) -> np.ndarray:
    """Per-element additive uniform noise with probability `rate`, projected in-ball."""
    gen = as_generator(rng)
    point = np.asarray(child, dtype=np.float64).copy()
    width = scale * ball.radius
    hit = gen.random(point.shape[0]) < rate
    noise = gen.uniform(-width, width, size=point.shape[0])
    point[hit] += noise[hit]
    return project_to_ball(point, ball)


def _batch_crossover(parents: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    n, dim = parents.shape
    pairs = parents.reshape(n // 2, 2, dim)
    k = dim // 2
    order = np.argsort(gen.random((n // 2, dim)), axis=1)
    mask = order < k
    a = pairs[:, 0, :].copy()
    b = pairs[:, 1, :].copy()
    swapped_a = np.where(mask, pairs[:, 1, :], a)
    swapped_b = np.where(mask, pairs[:, 0, :], b)
    return np.concatenate([swapped_a, swapped_b], axis=0)


def _batch_mutate(children: np.ndarray, ball: NormBall, rate: float, scale: float,
                  gen: np.random.Generator) -> np.ndarray:
    width = scale * ball.radius
    hit = gen.random(children.shape) < rate
    noise = gen.uniform(-width, width, size=children.shape)
    return project_to_ball(np.where(hit, children + noise, children), ball)


class _Pool:
    """Evaluated population (points plus cached J, D, fitness)."""

    def __init__(self, points, j, d, fitness):
        self.points = points
        self.j = j
        self.d = d
        self.fitness = fitness

    def take(self, idx):
        return _Pool(self.points[idx], self.j[idx], self.d[idx], self.fitness[idx])

    @staticmethod
    def concat(a: "_Pool", b: "_Pool") -> "_Pool":
        return _Pool(np.vstack([a.points, b.points]), np.concatenate([a.j, b.j]),
                     np.concatenate([a.d, b.d]), np.concatenate([a.fitness, b.fitness]))


def run_ga(sue: SueHandle, ball: NormBall, spec: MisinterpretationSpec,
           problem: GaProblem | None = None, cfg: GaConfig = GaConfig(),
           seed_point: np.ndarray | None = None) -> GaResult:
    """Evolve perturbations inside the ball toward the requested worst case.

    Deterministic given cfg.rng. Returns the best feasible individual ever
    seen plus per-iteration traces of the running objective and its margin.
    """
    if ball.radius <= 0:
        raise ContractViolation("GA needs a ball with positive radius")
    if problem is None:
        problem = GaProblem.SOL_FHAT if spec.region is Region.F_HAT else GaProblem.SOL_FTILDE
    problem = GaProblem(problem)
    count0 = sue.counter.total()
    ev = SeedEvaluator(sue, ball, spec, seed_point=seed_point)
    gen = cfg.rng.generator()
    n = cfg.population_size

    fhat = problem is GaProblem.SOL_FHAT
    phase = GaPhase.REFINE if fhat else GaPhase.SEEK_AE
    phase_switch_iteration = None

    best: Individual | None = None
    best_obj = -np.inf  # canonical: higher is better in every phase
    individuals = 0

    def evaluate(points: np.ndarray) -> _Pool:
        nonlocal individuals, best, best_obj
        j = ev.j_batch(points)
        if fhat or phase is GaPhase.REFINE:
            d = ev.d_batch(points)
        else:
            # during AE seeking D is only needed for the rare feasible points,
            # to keep "best ever seen" exact without paying for explanations
            d = np.full(points.shape[0], np.nan)
            ae = j >= 0
            if np.any(ae):
                d[ae] = ev.d_batch(points[ae])
        individuals += points.shape[0]
        fit = _fitness_vector(j, d)
        _update_best(points, j, d)
        return _Pool(points, j, d, fit)

    def _fitness_vector(j, d):
        i_c = np.where(j >= 0, -1.0, 1.0)
        if fhat:
            return i_c * d
        if phase is GaPhase.SEEK_AE:
            return j.copy()
        return -i_c / np.maximum(d, _D_FLOOR)

    def _update_best(points, j, d):
        nonlocal best, best_obj
        if fhat:
            feas = j < 0
            if not np.any(feas):
                return
            cand = np.where(feas, d, -np.inf).argmax()
            obj = d[cand]
        else:
            feas = j >= 0
            if not np.any(feas):
                return
            cand = np.where(feas, -d, -np.inf).argmax()
            obj = -d[cand]
        if obj > best_obj:
            best_obj = obj
            best = Individual(point=points[cand].copy(), j=float(j[cand]), d=float(d[cand]),
                              fitness=float(_fitness_vector(j[cand:cand + 1], d[cand:cand + 1])[0]),
                              feasible=True)

    init = sample_uniform_ball(ball, n - 1, gen)
    init = np.vstack([ev.seed_point[None, :], init])
    pool = evaluate(init)
    seek_best_j = float(pool.j.max())

    objective_trace: list[float] = []
    constraint_trace: list[float] = []
    phase_scores: list[float] = []  # best-so-far under the active phase, for plateau detection
    terminated_by = "budget"
    iterations = 0

    for it in range(1, cfg.max_iterations + 1):
        if cfg.max_individuals is not None and individuals + n > cfg.max_individuals:
            terminated_by = "budget"
            break
        iterations = it

        parent_idx = select_parents(pool.fitness, n, cfg.shift_epsilon, gen)
        parents = pool.points[parent_idx]
        children = _batch_crossover(parents, gen)
        children = _batch_mutate(children, ball, cfg.mutation_rate, cfg.mutation_scale, gen)
        child_pool = evaluate(children)

        merged = _Pool.concat(pool, child_pool)
        if cfg.pool_policy == "truncate":
            keep = np.argsort(-merged.fitness, kind="stable")[:n]
            pool = merged.take(keep)
        else:
            pool = merged
        seek_best_j = max(seek_best_j, float(pool.j.max()))

        if not fhat and phase is GaPhase.SEEK_AE:
            ae_count = int((pool.j >= 0).sum())
            if ae_count * 2 > pool.j.shape[0]:  # strictly more than half, never reverts
                phase = GaPhase.REFINE
                phase_switch_iteration = it
                missing = np.isnan(pool.d)
                if np.any(missing):
                    pool.d[missing] = ev.d_batch(pool.points[missing])
                pool.fitness = _fitness_vector(pool.j, pool.d)
                phase_scores = []

        objective_trace.append(best.d if best is not None else np.nan)
        constraint_trace.append(best.j if best is not None else np.nan)

        if not fhat and phase is GaPhase.SEEK_AE:
            phase_scores.append(seek_best_j)
        else:
            phase_scores.append(best_obj)
        window = cfg.plateau_window
        if len(phase_scores) > window:
            now, then = phase_scores[-1], phase_scores[-1 - window]
            if np.isfinite(now) and np.isfinite(then) and now - then < cfg.plateau_tol:
                terminated_by = "plateau"
                break
    else:
        terminated_by = "budget"

    result = GaResult(
        best=best,
        no_feasible=best is None,
        objective_trace=objective_trace,
        constraint_trace=constraint_trace,
        evaluations_used=sue.counter.total() - count0,
        individuals_evaluated=individuals,
        terminated_by=terminated_by,
        phase_switch_iteration=phase_switch_iteration,
        iterations=iterations,
    )
    return result
