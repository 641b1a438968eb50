"""Orchestration: wire a RunConfig to solvers, emit reports and witnesses."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bridge import remote_sue_connect
from .config import RunConfig, ga_config_from, ss_config_from
from .core import NormBall
from .errors import ConfigError
from .ga import run_ga
from .oracles import grid_worst_case, run_smc
from .report import dump_json, write_report, write_report_csv, write_witness
from .rng import RngSpec
from .subset import run_ss
from .sue import make_builtin_sue

log = logging.getLogger("robustxai")


def _sue_factory(cfg: RunConfig, allow_nondeterministic: bool, explainer: str | None = None):
    """Returns (factory, shared, closer): factory() yields a SUE per seed run.

    In-process targets get a fresh handle per run so per-row counters stay
    independent; a bridge connection is shared and forces sequential seeds.
    """
    target = cfg.target
    if "model" in target:
        name = explainer or target.get("explainer")

        def factory():
            return make_builtin_sue(target["model"], explainer=name,
                                    target=target.get("target_output", "logit"),
                                    explainer_params=target.get("explainer_params"))
        return factory, False, lambda: None
    if explainer is not None:
        raise ConfigError("target.explainers", "ranking needs an in-process model target")
    endpoint = target.get("bridge_command") or target.get("bridge_address")
    remote = remote_sue_connect(endpoint, timeout_ms=int(target.get("timeout_ms", 30_000)),
                                allow_nondeterministic=allow_nondeterministic)
    return (lambda: remote), True, remote.close


def _ball_for(cfg: RunConfig, seed: np.ndarray) -> NormBall:
    lower, upper = (None, None) if cfg.clip is None else cfg.clip
    return NormBall(center=seed, radius=cfg.r, lower_clip=lower, upper_clip=upper)


def _solve_one(cfg: RunConfig, sue, seed_id: int, seed: np.ndarray, rng: RngSpec,
               solver: dict, mh_steps: int | None = None) -> tuple[dict, dict | None]:
    """Run one (seed, solver) cell. Returns (row, witness payload or None)."""
    ball = _ball_for(cfg, seed)
    kind = solver["kind"]
    row: dict = {"seed_id": seed_id, "region": cfg.spec.region.value, "solver": kind,
                 "headline": None, "cov": None, "censored": None, "feasible": None,
                 "error": None}
    witness = None
    if kind == "ga":
        result = run_ga(sue, ball, cfg.spec, cfg=ga_config_from(solver, rng))
        row["feasible"] = not result.no_feasible
        row["extra"] = {"terminated_by": result.terminated_by, "iterations": result.iterations,
                        "phase_switch_iteration": result.phase_switch_iteration,
                        "individuals": result.individuals_evaluated}
        row["trace"] = {"objective": result.objective_trace,
                        "constraint": result.constraint_trace}
        if result.best is not None:
            row["headline"] = result.best.d
            attribution = np.asarray(sue.explain_batch(result.best.point[None, :]))[0]
            witness = {"seed_id": seed_id, "region": cfg.spec.region.value,
                       "point": result.best.point, "attribution": attribution,
                       "J": result.best.j, "D": result.best.d}
    elif kind == "ss":
        result = run_ss(sue, ball, cfg.spec, ss_config_from(solver, rng, mh_steps=mh_steps))
        row["headline"] = result.ln_p
        row["cov"] = result.cov
        row["censored"] = result.censored
        row["extra"] = {"estimator_samples": result.estimator_samples,
                        "levels": [{"index": rec.index, "threshold": rec.threshold,
                                    "p_bar": rec.p_bar, "phase": rec.phase,
                                    "acceptance_rate": rec.acceptance_rate,
                                    "proposal_scale_used": rec.proposal_scale_used,
                                    "closed": rec.closed, "survivors": rec.survivors}
                                   for rec in result.levels]}
        if result.misinterpretation_witnesses:
            point = result.misinterpretation_witnesses[0]
            attribution = np.asarray(sue.explain_batch(point[None, :]))[0]
            witness = {"seed_id": seed_id, "region": cfg.spec.region.value,
                       "point": point, "attribution": attribution}
    elif kind == "smc":
        result = run_smc(sue, ball, cfg.spec, int(solver["n_samples"]), rng)
        row["headline"] = None if result.zero_hits else result.ln_p
        row["cov"] = result.cov
        row["extra"] = {"hits": result.hits, "n_samples": result.n_samples,
                        "p_hat": result.p_hat, "zero_hits": result.zero_hits}
    elif kind == "grid":
        result = grid_worst_case(sue, ball, cfg.spec, int(solver["resolution"]))
        row["feasible"] = result.best_point is not None
        if result.best_point is not None:
            row["headline"] = result.best_d
            attribution = np.asarray(sue.explain_batch(result.best_point[None, :]))[0]
            witness = {"seed_id": seed_id, "region": cfg.spec.region.value,
                       "point": result.best_point, "attribution": attribution,
                       "D": result.best_d}
    else:
        raise ConfigError("solver.kind", f"unknown solver {kind!r}")
    row["evaluations"] = sue.counter.total()
    return row, witness


def _run_cells(cfg: RunConfig, solver: dict, jobs: int, allow_nondeterministic: bool,
               explainer: str | None = None,
               mh_steps: int | None = None) -> tuple[list[dict], list[dict], list[dict], bool]:
    """All seeds for one solver/explainer. Returns (rows, csv_rows, witnesses, any_error)."""
    factory, shared, closer = _sue_factory(cfg, allow_nondeterministic, explainer)
    results: dict[int, tuple[dict, dict | None, float]] = {}
    any_error = False

    def work(i: int):
        sue = factory()
        # the stream is keyed by the seed alone so explainers see paired samples
        rng = RngSpec(cfg.master_seed).child(i)
        t0 = time.perf_counter()
        try:
            row, witness = _solve_one(cfg, sue, i, cfg.seeds[i], rng, solver, mh_steps)
        except Exception as exc:  # per-seed hard error lands in the row
            log.exception("seed %d failed", i)
            row = {"seed_id": i, "region": cfg.spec.region.value, "solver": solver["kind"],
                   "headline": None, "cov": None, "censored": None, "feasible": None,
                   "evaluations": sue.counter.total(), "error": f"{type(exc).__name__}: {exc}"}
            witness = None
        return row, witness, (time.perf_counter() - t0) * 1000.0

    n_seeds = cfg.seeds.shape[0]
    try:
        if shared or jobs <= 1:
            for i in range(n_seeds):
                if shared:
                    before = factory().counter.total()
                    results[i] = work(i)
                    results[i][0]["evaluations"] = factory().counter.total() - before
                else:
                    results[i] = work(i)
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for i, res in zip(range(n_seeds), pool.map(work, range(n_seeds))):
                    results[i] = res
    finally:
        closer()

    rows, csv_rows, witnesses = [], [], []
    for i in range(n_seeds):
        row, witness, ms = results[i]
        if row.get("error"):
            any_error = True
        if explainer is not None:
            row = {"explainer": explainer, **row}
        rows.append(row)
        csv_row = dict(row)
        csv_row["wall_time_ms"] = ms
        csv_rows.append(csv_row)
        if witness is not None:
            witnesses.append(witness)
    return rows, csv_rows, witnesses, any_error


def execute_config(cfg: RunConfig, jobs: int = 1, out_dir: str | None = None,
                   allow_nondeterministic: bool = False) -> int:
    """Run the configured solver per seed; write report.json / report.csv / witnesses.

    Exit code 0 on success, 2 when any per-seed hard error was recorded.
    """
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    solver = cfg.solver

    if solver["kind"] == "ss" and solver.get("sweep_M"):
        return _execute_sweep(cfg, jobs, out, allow_nondeterministic)

    rows, csv_rows, witnesses, any_error = _run_cells(cfg, solver, jobs, allow_nondeterministic)
    write_report(out, cfg.echo(), rows, csv_rows)
    for witness in witnesses:
        write_witness(out, witness["seed_id"], witness["region"], witness)
    return 2 if any_error else 0


def _execute_sweep(cfg: RunConfig, jobs: int, out: Path, allow_nondeterministic: bool) -> int:
    """One report per MH-step count, plus a summary with the accuracy column."""
    solver = cfg.solver
    reference = solver.get("reference_ln_p")
    summary = []
    any_error = False
    for m in solver["sweep_M"]:
        rows, csv_rows, _, err = _run_cells(cfg, solver, jobs, allow_nondeterministic, mh_steps=m)
        any_error = any_error or err
        echo = cfg.echo()
        echo["solver"] = {**solver, "M": m}
        echo["solver"].pop("sweep_M", None)
        dump_json({"config": echo, "rows": rows}, out / f"report_M{m}.json")
        write_report_csv(csv_rows, out / f"report_M{m}.csv")
        ln_ps = [row["headline"] for row in rows if row.get("headline") is not None]
        entry = {"M": m, "mean_ln_p": float(np.mean(ln_ps)) if ln_ps else None}
        if reference is not None and ln_ps:
            entry["mean_abs_delta_ln_p"] = float(np.mean([abs(v - reference) for v in ln_ps]))
        summary.append(entry)
    cols = ["M", "mean_ln_p"] + (["mean_abs_delta_ln_p"] if reference is not None else [])
    write_report_csv(summary, out / "sweep_summary.csv", columns=cols)
    return 2 if any_error else 0


def _robust_ascending(solver_kind: str, region: str) -> bool:
    # probabilities: lower ln P is always more robust; worst cases: direction flips by region
    if solver_kind in ("ss", "smc"):
        return True
    return region == "f_hat"


def rank_explainers(cfg: RunConfig, jobs: int = 1, out_dir: str | None = None,
                    allow_nondeterministic: bool = False) -> int:
    """Run the configured solver per (seed, explainer); emit median-based ranking."""
    explainers = cfg.target.get("explainers")
    if not explainers or len(explainers) < 2:
        raise ConfigError("target.explainers", "ranking needs at least 2 explainers")
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    all_rows, all_csv = [], []
    any_error = False
    stats = []
    for name in explainers:
        rows, csv_rows, witnesses, err = _run_cells(
            cfg, cfg.solver, jobs, allow_nondeterministic, explainer=name)
        any_error = any_error or err
        all_rows.extend(rows)
        all_csv.extend(csv_rows)
        for witness in witnesses:
            write_witness(out, f"{witness['seed_id']}_{name}", witness["region"], witness)
        values = [row["headline"] for row in rows if row.get("headline") is not None]
        if not values:
            stats.append({"explainer": name, "n": 0, "median": None, "min": None,
                          "q1": None, "q3": None, "max": None})
            continue
        lo, q1, med, q3, hi = np.percentile(values, [0, 25, 50, 75, 100])
        stats.append({"explainer": name, "n": len(values), "median": float(med),
                      "min": float(lo), "q1": float(q1), "q3": float(q3), "max": float(hi)})

    ascending = _robust_ascending(cfg.solver["kind"], cfg.spec.region.value)
    keyed = sorted(stats, key=lambda s: (s["median"] is None,
                                         (s["median"] if ascending else -s["median"])
                                         if s["median"] is not None else 0.0))
    rank = 0
    prev = object()
    for pos, entry in enumerate(keyed, start=1):
        if entry["median"] != prev:
            rank = pos
            prev = entry["median"]
        entry["rank"] = rank

    write_report(out, cfg.echo(), all_rows, all_csv)
    dump_json({"ascending_is_robust": ascending, "explainers": keyed}, out / "ranking.json")
    write_report_csv(keyed, out / "ranking.csv",
                     columns=["rank", "explainer", "n", "median", "min", "q1", "q3", "max"])
    return 2 if any_error else 0
