"""Subset simulation for rare misinterpretation probabilities.

The failure probability is written as a product of conditional probabilities
over nested intermediate events defined by adaptive quantile thresholds on a
scalar property. New conditional samples come from component-wise
Metropolis chains (uniform target over the ball, symmetric uniform proposals,
so the density ratio is one and acceptance reduces to staying inside the box
and inside the current event). Each level replicates the survivors to N chain
seeds round-robin and takes the last state after M steps per chain.

For the preserved-prediction region the property is the signed discrepancy
I_c * D; for the flipped-prediction region a first stage climbs the margin J
to the critical event {J >= 0}, then a second stage works on -I_c/D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .core import (MisinterpretationSpec, NormBall, Region,
                   classification_indicator_batch, sample_uniform_ball)
from .errors import ContractViolation
from .evaluation import SeedEvaluator
from .ga import GaPhase
from .rng import RngSpec, as_generator
from .sue import SueHandle

_D_FLOOR = 1e-300


@dataclass(frozen=True)
class SsConfig:
    samples_per_level: int = 1000
    quantile: float = 0.1
    mh_steps: int = 250
    ln_p_min: float = -100.0
    proposal_scale: float = 0.5
    target_acceptance: float = 0.234
    adapt_every: int = 25
    lambda_cov: float = 0.0
    max_witnesses: int = 10
    rng: RngSpec = RngSpec(0)

    def __post_init__(self):
        if not (0.0 < self.quantile < 1.0):
            raise ContractViolation("quantile must be in (0, 1)")
        keep = self.quantile * self.samples_per_level
        if abs(keep - round(keep)) > 1e-9:
            raise ContractViolation("quantile * samples_per_level must be an integer seed count")
        if round(keep) < 10:
            raise ContractViolation("quantile * samples_per_level must be >= 10")
        if self.mh_steps < 1:
            raise ContractViolation("mh_steps must be >= 1")
        if self.adapt_every < 1:
            raise ContractViolation("adapt_every must be >= 1")
        if not (0.0 < self.proposal_scale <= 1.0):
            raise ContractViolation("proposal_scale must be in (0, 1]")

    @property
    def seed_count(self) -> int:
        return int(round(self.quantile * self.samples_per_level))


@dataclass
class LevelRecord:
    index: int
    threshold: float
    p_bar: float
    phase: str | None = None
    acceptance_rate: float | None = None
    proposal_scale_used: float | None = None
    closed: bool = False
    survivors: int = 0


@dataclass
class SsResult:
    ln_p: float
    cov: float
    levels: list[LevelRecord]
    censored: bool
    total_evaluations: int
    estimator_samples: int
    misinterpretation_witnesses: list[np.ndarray] = field(default_factory=list)

    @property
    def p_bar(self) -> float:
        return math.exp(self.ln_p)

    @property
    def delta2(self) -> float:
        return self.cov ** 2


class ThresholdResult(NamedTuple):
    level: float
    is_final: bool
    closed: bool


def staged_property(region: Region, phase: GaPhase | None, j, i_c, d):
    """Scalar property S; larger S always means closer to the failure region."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0):
        raise ContractViolation("D must be nonnegative")
    if Region(region) is Region.F_HAT:
        return np.asarray(i_c, dtype=np.float64) * d
    if GaPhase(phase) is GaPhase.SEEK_AE:
        return np.asarray(j, dtype=np.float64)
    return -np.asarray(i_c, dtype=np.float64) / np.maximum(d, _D_FLOOR)


def adaptive_threshold(s_values: np.ndarray, quantile: float, final_level: float) -> ThresholdResult:
    """Next level threshold: the ceil((1-quantile)*N)-th order statistic, clamped at the final level.

    On discrete plateaus the threshold drops to the largest sample value with at
    least quantile*N strict exceeders. If no value qualifies (a plateau at the
    bottom of the sample, e.g. the similarity clamp floor), membership stays
    strict at the order statistic and the realized deficit fraction feeds the
    estimator; re-including the plateau mass would freeze the ladder. Only a
    completely flat sample falls back to closed membership.
    """
    s = np.asarray(s_values, dtype=np.float64)
    n = s.shape[0]
    keep = int(round(quantile * n))
    if keep < 1 or keep >= n:
        raise ContractViolation("quantile * N must give at least one survivor and one casualty")
    s_sorted = np.sort(s)
    base = s_sorted[n - keep - 1]  # 0-based index of the ceil((1-q)N)-th ascending order statistic
    if base >= final_level:
        return ThresholdResult(level=float(final_level), is_final=True, closed=False)
    exceeders = int((s > base).sum())
    if exceeders >= keep:
        return ThresholdResult(level=float(base), is_final=False, closed=False)
    # ties swallowed the quantile: lower the threshold past the plateau
    lower = np.unique(s_sorted[s_sorted < base])
    for candidate in lower[::-1]:
        if int((s > candidate).sum()) >= keep:
            return ThresholdResult(level=float(candidate), is_final=False, closed=False)
    if exceeders >= 1:
        return ThresholdResult(level=float(base), is_final=False, closed=False)
    return ThresholdResult(level=float(base), is_final=False, closed=True)


def mh_chain_advance(states: np.ndarray, scores: np.ndarray, score_fn: Callable[[np.ndarray], np.ndarray],
                     threshold: float, closed: bool, ball: NormBall, half_width: float,
                     steps: int, rng: RngSpec | np.random.Generator) -> tuple[np.ndarray, np.ndarray, int]:
    """Advance every chain `steps` component-wise Metropolis steps within the level event.

    Per coordinate a symmetric uniform step is proposed; leaving the feasible
    box has target density zero so that coordinate reverts. The composite
    candidate then replaces the state only if it still satisfies the level
    membership test. Returns final states, their scores, and the number of
    whole-candidate acceptances.
    """
    gen = as_generator(rng)
    states = np.array(states, dtype=np.float64)
    scores = np.array(scores, dtype=np.float64)
    member = (scores >= threshold) if closed else (scores > threshold)
    if not np.all(member):
        raise ContractViolation("every chain state must satisfy the level membership test")
    lo, hi = ball.bounds()
    n = states.shape[0]
    accepted = 0
    for _ in range(steps):
        proposal = states + gen.uniform(-half_width, half_width, size=states.shape)
        out = (proposal < lo) | (proposal > hi)
        proposal[out] = states[out]
        s_prop = np.asarray(score_fn(proposal), dtype=np.float64)
        ok = (s_prop >= threshold) if closed else (s_prop > threshold)
        accepted += int(ok.sum())
        states[ok] = proposal[ok]
        scores[ok] = s_prop[ok]
    return states, scores, accepted


@dataclass
class CovEstimate:
    delta2: float
    delta: float
    prop2_bias_bound: float
    prop3_cov_bound: float
    per_level: list[float]


def cov_estimate(p_bars, n: int, lambdas=0.0) -> CovEstimate:
    """Squared c.o.v. sum over levels plus the bias and c.o.v. bounds.

    delta_i^2 = (1 - p_i) / (p_i N) * (1 + lambda_i); the bias bound sums
    delta_i * delta_j over i > j and the c.o.v. bound over all pairs.
    """
    p = np.asarray(p_bars, dtype=np.float64)
    if np.any(p <= 0) or np.any(p > 1):
        raise ContractViolation("every conditional probability must lie in (0, 1]")
    lam = np.broadcast_to(np.asarray(lambdas, dtype=np.float64), p.shape)
    d2 = (1.0 - p) / (p * n) * (1.0 + lam)
    d = np.sqrt(d2)
    total = float(d.sum())
    prop3 = total ** 2
    prop2 = 0.5 * (prop3 - float(d2.sum()))
    return CovEstimate(delta2=float(d2.sum()), delta=float(np.sqrt(d2.sum())),
                       prop2_bias_bound=prop2, prop3_cov_bound=prop3,
                       per_level=[float(v) for v in d2])


def smc_equivalent_samples(p_f: float, delta2: float) -> float:
    """Plain Monte Carlo sample count that reaches the same squared c.o.v."""
    if not (0.0 < p_f < 1.0) or delta2 <= 0:
        raise ContractViolation("need 0 < p < 1 and delta2 > 0")
    return (1.0 - p_f) / (p_f * delta2)


@dataclass
class _Stage:
    score_fn: Callable[[np.ndarray], np.ndarray]
    final_level: float
    final_closed: bool
    phase: str | None
    final_phase: str | None  # tag recorded at this stage's terminal level


def _run_stages(ball: NormBall, stages: list[_Stage], cfg: SsConfig) -> SsResult:
    gen = cfg.rng.generator()
    n = cfg.samples_per_level
    scale = cfg.proposal_scale
    stage_idx = 0
    stage = stages[0]

    points = sample_uniform_ball(ball, n, gen)
    scores = np.asarray(stage.score_fn(points), dtype=np.float64)
    levels = [LevelRecord(index=1, threshold=-np.inf, p_bar=1.0, phase=stage.phase,
                          survivors=n)]
    ln_p = 0.0
    estimator_samples = n
    censored = False
    witnesses: list[np.ndarray] = []
    prev_threshold = -np.inf

    while True:
        thr = adaptive_threshold(scores, cfg.quantile, stage.final_level)
        closed = stage.final_closed if thr.is_final else thr.closed
        member = (scores >= thr.level) if closed else (scores > thr.level)
        count = int(member.sum())
        if thr.is_final and count == 0:
            # quantile reached the target but no sample strictly inside it:
            # retreat to a plain intermediate level and keep going
            thr = adaptive_threshold(scores, cfg.quantile, np.inf)
            closed = thr.closed
            member = (scores >= thr.level) if closed else (scores > thr.level)
            count = int(member.sum())
        if not thr.is_final:
            if np.isfinite(prev_threshold) and thr.level <= prev_threshold:
                raise RuntimeError("subset simulation stalled: threshold failed to increase")
            if count == n:
                raise RuntimeError("subset simulation stalled: property plateau spans the sample")
        prev_threshold = thr.level

        p_bar = count / n
        ln_p += math.log(p_bar)
        is_terminal = thr.is_final and stage_idx == len(stages) - 1
        record = LevelRecord(index=len(levels) + 1, threshold=float(thr.level), p_bar=p_bar,
                             phase=(stage.final_phase if thr.is_final else stage.phase),
                             closed=closed, survivors=count)
        levels.append(record)

        if is_terminal:
            hits = points[member]
            witnesses = [hits[i].copy() for i in range(min(cfg.max_witnesses, hits.shape[0]))]
            break
        if ln_p < cfg.ln_p_min:
            censored = True
            break

        survivors = points[member]
        survivor_scores = scores[member]
        ring = np.arange(n) % count
        seeds = survivors[ring]
        seed_scores = survivor_scores[ring]

        accepted = 0
        steps_done = 0
        while steps_done < cfg.mh_steps:
            chunk = min(cfg.adapt_every, cfg.mh_steps - steps_done)
            seeds, seed_scores, acc = mh_chain_advance(
                seeds, seed_scores, stage.score_fn, thr.level, closed, ball,
                half_width=scale * ball.radius, steps=chunk, rng=gen)
            rate = acc / (n * chunk)
            scale = float(np.clip(scale * math.exp(rate - cfg.target_acceptance), 1e-3, 1.0))
            accepted += acc
            steps_done += chunk
        record.acceptance_rate = accepted / (n * cfg.mh_steps)
        record.proposal_scale_used = scale
        estimator_samples += n

        points = seeds
        if thr.is_final:
            stage_idx += 1
            stage = stages[stage_idx]
            scores = np.asarray(stage.score_fn(points), dtype=np.float64)
            prev_threshold = -np.inf
        else:
            scores = seed_scores

    cov = cov_estimate([rec.p_bar for rec in levels], n, cfg.lambda_cov)
    return SsResult(ln_p=ln_p, cov=cov.delta, levels=levels, censored=censored,
                    total_evaluations=0, estimator_samples=estimator_samples,
                    misinterpretation_witnesses=witnesses)


def run_ss_event(ball: NormBall, score_batch_fn: Callable[[np.ndarray], np.ndarray],
                 final_level: float, cfg: SsConfig, closed_final: bool = False) -> SsResult:
    """Subset simulation for a generic event {score > final_level} on a uniform ball."""
    if ball.radius <= 0:
        raise ContractViolation("subset simulation needs a ball with positive radius")
    calls = 0

    def counted(x):
        nonlocal calls
        calls += x.shape[0]
        return score_batch_fn(x)

    stage = _Stage(score_fn=counted, final_level=final_level, final_closed=closed_final,
                   phase=None, final_phase=None)
    result = _run_stages(ball, [stage], cfg)
    result.total_evaluations = calls
    return result


def run_ss(sue: SueHandle, ball: NormBall, spec: MisinterpretationSpec, cfg: SsConfig,
           seed_point: np.ndarray | None = None) -> SsResult:
    """Estimate ln P of the misinterpretation region within the ball.

    Requires the seed itself to be confidently classified. The flipped-
    prediction region inserts the closed critical level {J >= 0} once the
    margin quantile reaches zero, then refines on the discrepancy side.
    """
    if ball.radius <= 0:
        raise ContractViolation("subset simulation needs a ball with positive radius")
    count0 = sue.counter.total()
    ev = SeedEvaluator(sue, ball, spec, seed_point=seed_point)
    ev.require_confident_seed()

    if spec.region is Region.F_HAT:
        stages = [_Stage(score_fn=ev.indicator_weighted_d, final_level=spec.beta,
                         final_closed=False, phase=None, final_phase=None)]
    else:
        def refine_score(x):
            j, d = ev.jd_batch(x)
            i_c = classification_indicator_batch(j)
            return -i_c / np.maximum(d, _D_FLOOR)

        stages = [
            _Stage(score_fn=ev.j_batch, final_level=0.0, final_closed=True,
                   phase="seek_ae", final_phase="critical"),
            _Stage(score_fn=refine_score, final_level=1.0 / spec.alpha,
                   final_closed=False, phase="refine", final_phase="refine"),
        ]

    result = _run_stages(ball, stages, cfg)
    result.total_evaluations = sue.counter.total() - count0
    return result
