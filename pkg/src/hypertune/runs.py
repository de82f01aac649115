"""Run orchestration: artifacts on disk, replay audits, and comparisons.

Every run owns a fresh timestamped directory containing:

    history.jsonl     one JSON object per evaluation (failures carry "error")
    trace.csv         iteration, score, best_so_far
    report.json       best record, evaluations-to-optimum, wall clock
    config.resolved   the full effective configuration as JSON
    ABORTED           marker file, only when the run aborted

``replay`` re-derives every Bayesian acquisition decision from the recorded
prefix by driving the real optimizer loop with a playback objective, so any
divergence between code and artifact is caught exactly.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import os
import statistics
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .baselines import run_cobyla, run_pso, run_random
from .bo import RunAbortedError, run_bo
from .config import RunConfig, config_from_resolved, resolved_dict
from .history import EvalRecord, FailureRecord, History
from .objectives import (
    BUILTINS,
    EvaluationError,
    Objective,
    ObjectiveSpec,
    make_objective,
)
from .space import ParamPoint, SearchSpace

OPTIMUM_EPS = 1e-9


# --- history serialization ---------------------------------------------------


def history_lines(space: SearchSpace, history: History) -> list[str]:
    """History as JSON lines, records and failures merged in iteration order."""
    entries: list[tuple[int, dict]] = []
    for rec in history.records:
        entries.append(
            (
                rec.iteration,
                {
                    "iteration": rec.iteration,
                    "params": space.point_as_dict(rec.point),
                    "score": rec.score,
                    "wall_time": rec.wall_time,
                    "objective_id": rec.objective_id,
                },
            )
        )
    for fail in history.failures:
        entries.append(
            (
                fail.iteration,
                {
                    "iteration": fail.iteration,
                    "params": space.point_as_dict(fail.point),
                    "error": fail.error,
                },
            )
        )
    entries.sort(key=lambda pair: pair[0])
    return [json.dumps(obj, separators=(",", ":")) for _, obj in entries]


def read_history(path: Path, space: SearchSpace) -> History:
    history = History()
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            point = space.point_from_dict(obj["params"])
            if "error" in obj:
                history.failures.append(
                    FailureRecord(obj["iteration"], point, obj["error"])
                )
            else:
                history.records.append(
                    EvalRecord(
                        obj["iteration"],
                        point,
                        obj["score"],
                        obj["wall_time"],
                        obj["objective_id"],
                    )
                )
    return history


def trace_rows(history: History) -> list[tuple[int, float, float]]:
    rows = []
    best = float("-inf")
    for rec in history.records:
        best = max(best, rec.score)
        rows.append((rec.iteration, rec.score, best))
    return rows


# --- optimum lookup ----------------------------------------------------------


def known_optimum(spec: ObjectiveSpec, space: SearchSpace) -> float | None:
    """True lattice optimum for built-in objectives, by full enumeration."""
    if spec.kind != "builtin" or space.size > 200_000:
        return None
    fn = BUILTINS[spec.builtin_id]
    sign = -1.0 if spec.negate else 1.0
    return max(sign * fn(space, p) for p in space.enumerate_points())


# --- running -----------------------------------------------------------------


@dataclass
class RunResult:
    config: RunConfig
    history: History
    best: EvalRecord | None
    aborted: bool
    error: str | None
    wall_clock: float


def execute(cfg: RunConfig, objective: Objective | None = None) -> RunResult:
    """Run the configured optimizer; aborts are captured, not raised."""
    eff = cfg.effective()
    own_objective = objective is None
    if objective is None:
        objective = make_objective(eff.objective, eff.space)
    start = time.perf_counter()
    aborted = False
    error = None
    best = None
    try:
        if eff.optimizer == "bo":
            history, best = run_bo(eff.space, objective, eff.bo)
        elif eff.optimizer == "cobyla":
            history, best = run_cobyla(eff.space, objective, eff.cobyla)
        elif eff.optimizer == "pso":
            history, best = run_pso(
                eff.space, objective, eff.pso, max_evals=eff.max_evals
            )
        else:
            history, best = run_random(eff.space, objective, eff.seed, eff.max_evals)
    except RunAbortedError as exc:
        history = exc.history
        aborted = True
        error = str(exc)
        best = history.best() if history.records else None
    except EvaluationError as exc:
        history = History()
        aborted = True
        error = str(exc)
    finally:
        if own_objective:
            objective.close()
    return RunResult(
        config=cfg,
        history=history,
        best=best,
        aborted=aborted,
        error=error,
        wall_clock=time.perf_counter() - start,
    )


def build_report(result: RunResult) -> dict:
    eff = result.config.effective()
    optimum = known_optimum(eff.objective, eff.space)
    evals_to_optimum = None
    if optimum is not None and result.history.records:
        evals_to_optimum = result.history.evaluations_to_reach(optimum - OPTIMUM_EPS)
    best = None
    if result.best is not None:
        best = {
            "iteration": result.best.iteration,
            "params": eff.space.point_as_dict(result.best.point),
            "score": result.best.score,
        }
    return {
        "optimizer": eff.optimizer,
        "seed": eff.seed,
        "objective_id": eff.objective.objective_id,
        "budget": eff.max_evals,
        "n_evaluations": len(result.history.records),
        "n_failures": len(result.history.failures),
        "best": best,
        "optimum_score": optimum,
        "evals_to_optimum": evals_to_optimum,
        "aborted": result.aborted,
        "error": result.error,
        "wall_clock_seconds": result.wall_clock,
    }


def make_run_dir(base: str | Path, optimizer: str, seed: int) -> Path:
    """A fresh timestamped directory; never reuses an existing one."""
    base = Path(base)
    base.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    candidate = base / f"{stamp}-{optimizer}-seed{seed}"
    counter = 1
    while candidate.exists():
        candidate = base / f"{stamp}-{optimizer}-seed{seed}-{counter}"
        counter += 1
    candidate.mkdir()
    return candidate


def write_artifacts(run_dir: Path, result: RunResult) -> None:
    eff = result.config.effective()
    (run_dir / "history.jsonl").write_text(
        "".join(line + "\n" for line in history_lines(eff.space, result.history))
    )
    rows = trace_rows(result.history)
    (run_dir / "trace.csv").write_text(
        "iteration,score,best_so_far\n"
        + "".join(f"{i},{s!r},{b!r}\n" for i, s, b in rows)
    )
    (run_dir / "report.json").write_text(
        json.dumps(build_report(result), indent=2) + "\n"
    )
    (run_dir / "config.resolved").write_text(
        json.dumps(resolved_dict(result.config), indent=2) + "\n"
    )
    if result.aborted:
        (run_dir / "ABORTED").write_text((result.error or "aborted") + "\n")


def run_and_persist(cfg: RunConfig, out_dir: str | Path | None = None) -> tuple[Path, RunResult]:
    result = execute(cfg)
    run_dir = make_run_dir(out_dir or cfg.output_dir, cfg.optimizer, cfg.seed)
    write_artifacts(run_dir, result)
    return run_dir, result


# --- replay ------------------------------------------------------------------


class _Playback(Objective):
    """Feeds recorded scores back to the optimizer and checks its choices."""

    def __init__(self, spec: ObjectiveSpec, space: SearchSpace, history: History):
        super().__init__(spec, space)
        entries: list[tuple[int, ParamPoint, float | None, str | None]] = []
        for rec in history.records:
            entries.append((rec.iteration, rec.point, rec.score, None))
        for fail in history.failures:
            entries.append((fail.iteration, fail.point, None, fail.error))
        entries.sort(key=lambda e: e[0])
        self._entries = entries
        self._cursor = 0
        self.divergence: str | None = None

    class Divergence(Exception):
        pass

    @property
    def consumed(self) -> bool:
        return self._cursor == len(self._entries)

    def evaluate(self, point: ParamPoint) -> float:
        if self._cursor >= len(self._entries):
            raise self.Divergence(
                f"optimizer requested extra evaluation at {point} beyond the record"
            )
        iteration, recorded_point, score, error = self._entries[self._cursor]
        if tuple(point) != tuple(recorded_point):
            raise self.Divergence(
                f"iteration {iteration}: recorded point {recorded_point}, "
                f"re-derived {tuple(point)}"
            )
        self._cursor += 1
        if error is not None:
            raise EvaluationError(error)
        # Recorded scores already carry the maximize orientation; the
        # playback stands in for the whole objective handle.
        return score


def replay_run(run_dir: str | Path) -> tuple[bool, str]:
    """Audit a persisted run; (ok, message).

    Bayesian runs are re-derived decision by decision; other optimizers get
    the reduced check (points valid, best-so-far monotone, trace consistent).
    """
    run_dir = Path(run_dir)
    resolved = run_dir / "config.resolved"
    history_path = run_dir / "history.jsonl"
    if not resolved.exists() or not history_path.exists():
        return False, f"{run_dir}: missing config.resolved or history.jsonl"
    cfg = config_from_resolved(json.loads(resolved.read_text()))
    eff = cfg.effective()
    history = read_history(history_path, eff.space)

    for rec in history.records:
        if not eff.space.validate(rec.point):
            return False, f"iteration {rec.iteration}: invalid point {rec.point}"
    iterations = [e.iteration for e in history.records] + [
        f.iteration for f in history.failures
    ]
    if sorted(iterations) != sorted(set(iterations)):
        return False, "duplicate iteration indices in history"

    if eff.optimizer != "bo":
        return True, f"{eff.optimizer} run verified (validity and monotonicity)"

    playback = _Playback(eff.objective, eff.space, history)
    try:
        run_bo(eff.space, playback, eff.bo)
    except _Playback.Divergence as exc:
        return False, str(exc)
    except RunAbortedError:
        pass  # aborted runs replay up to the abort point
    if not playback.consumed:
        return False, "optimizer stopped before consuming the recorded history"
    return True, f"bo run verified ({len(history.records)} decisions reproduced)"


# --- comparison --------------------------------------------------------------


def _median(values: list[float]) -> float:
    return statistics.median(values) if values else math.inf


def _iqr(values: list[float]) -> tuple[float, float]:
    if not values:
        return (math.inf, math.inf)
    ordered = sorted(values)
    lo = ordered[int(0.25 * (len(ordered) - 1))]
    hi = ordered[int(0.75 * (len(ordered) - 1))]
    return (lo, hi)


def run_compare(
    cfg: RunConfig,
    optimizers: list[str],
    seeds: list[int],
    budget: int | None = None,
    jobs: int = 1,
    out_dir: str | Path | None = None,
) -> dict:
    """Every (optimizer, seed) cell with identical budgets; medians per optimizer.

    Cells that abort are reported per cell and do not stop the comparison.
    Evaluations-to-optimum uses the enumerated optimum of built-in
    objectives; cells that never reach it count as infinity (null in JSON).
    """
    if len(seeds) < 2:
        raise ValueError("comparison needs at least 2 seeds")
    base = Path(out_dir or cfg.output_dir) / time.strftime("compare-%Y%m%d-%H%M%S")
    counter = 1
    while base.exists():
        base = base.with_name(base.name + f"-{counter}")
        counter += 1
    base.mkdir(parents=True)

    cells = []
    for optimizer in optimizers:
        for seed in seeds:
            cell_cfg = replace(
                cfg,
                optimizer=optimizer,
                seed=seed,
                max_evals=budget or cfg.max_evals,
            )
            cells.append(cell_cfg)

    def run_cell(cell_cfg: RunConfig) -> tuple[RunConfig, Path, dict]:
        result = execute(cell_cfg)
        cell_dir = base / f"{cell_cfg.optimizer}-seed{cell_cfg.seed}"
        cell_dir.mkdir()
        write_artifacts(cell_dir, result)
        return cell_cfg, cell_dir, build_report(result)

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]

    per_optimizer: dict[str, dict] = {}
    cell_rows = []
    for cell_cfg, cell_dir, report in rows:
        cell_rows.append(
            {
                "optimizer": cell_cfg.optimizer,
                "seed": cell_cfg.seed,
                "best_score": report["best"]["score"] if report["best"] else None,
                "evals_to_optimum": report["evals_to_optimum"],
                "aborted": report["aborted"],
                "error": report["error"],
                "dir": str(cell_dir),
            }
        )
    for optimizer in optimizers:
        mine = [r for r in cell_rows if r["optimizer"] == optimizer]
        reached = [
            float(r["evals_to_optimum"])
            for r in mine
            if r["evals_to_optimum"] is not None
        ]
        # Unreached cells count as +inf so medians stay honest.
        censored = reached + [math.inf] * (len(mine) - len(reached))
        med = _median(censored)
        lo, hi = _iqr(censored)
        scores = [r["best_score"] for r in mine if r["best_score"] is not None]
        per_optimizer[optimizer] = {
            "n_cells": len(mine),
            "n_reached_optimum": len(reached),
            "median_evals_to_optimum": None if math.isinf(med) else med,
            "iqr_evals_to_optimum": [
                None if math.isinf(lo) else lo,
                None if math.isinf(hi) else hi,
            ],
            "median_best_score": _median(scores) if scores else None,
            "n_aborted": sum(1 for r in mine if r["aborted"]),
        }

    comparison = {
        "budget": budget or cfg.max_evals,
        "seeds": seeds,
        "objective_id": cfg.objective.objective_id,
        "per_optimizer": per_optimizer,
        "cells": cell_rows,
        "output_dir": str(base),
    }
    (base / "comparison.json").write_text(json.dumps(comparison, indent=2) + "\n")
    with open(base / "comparison.csv", "w") as handle:
        handle.write("optimizer,seed,best_score,evals_to_optimum,aborted\n")
        for row in cell_rows:
            eto = "" if row["evals_to_optimum"] is None else row["evals_to_optimum"]
            handle.write(
                f"{row['optimizer']},{row['seed']},{row['best_score']},{eto},"
                f"{int(row['aborted'])}\n"
            )
    return comparison


def jobs_from_env(requested: int | None) -> int:
    """--jobs, overridden by the HYPERTUNE_JOBS environment variable."""
    env = os.environ.get("HYPERTUNE_JOBS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, requested or 1)
