"""Bayesian optimization over an enumerable integer lattice.

The outer loop: evaluate a small seeded random design, then repeatedly fit
the GP surrogate to the full history, pick the unvisited lattice point with
the highest acquisition value, evaluate it, and append to the history.  The
argmax record over all evaluations is returned alongside the history.

Failures are tolerated up to a point: a failed evaluation is logged and the
iteration retries once at a different point (fresh acquisition argmax with
the failed point excluded); three consecutive failures abort the run with
the partial history attached.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import AcquisitionConfig, SpaceExhaustedError, select_next
from .gp import KernelConfig, fit, fit_grid_search
from .history import EvalRecord, FailureRecord, History
from .objectives import EvaluationError, Objective
from .space import ParamPoint, SearchSpace

_MAX_CONSECUTIVE_FAILURES = 3


class RunAbortedError(Exception):
    """The objective kept failing; carries the partial history."""

    def __init__(self, message: str, history: History):
        super().__init__(message)
        self.history = history


@dataclass(frozen=True)
class BoConfig:
    max_iterations: int = 50
    n_initial: int = 3
    seed: int = 0
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    refit_period: int = 5
    allow_revisit: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.n_initial < 1:
            raise ValueError("n_initial must be positive")
        if self.refit_period < 1:
            raise ValueError("refit_period must be positive")


def _measure(objective: Objective, point: ParamPoint) -> tuple[float, float]:
    """Evaluate and time; built-ins report 0.0 so runs stay byte-reproducible."""
    if objective.spec.kind == "builtin":
        return objective.evaluate(point), 0.0
    start = time.perf_counter()
    score = objective.evaluate(point)
    return score, time.perf_counter() - start


def run_bo(
    space: SearchSpace, objective: Objective, cfg: BoConfig
) -> tuple[History, EvalRecord]:
    """Run the BO loop; returns the history and its argmax record.

    Exactly ``min(max_iterations, lattice size)`` successful evaluations are
    targeted; the run stops early only when the lattice is exhausted or the
    failure budget is spent.  Fixed seed plus a deterministic objective gives
    a bit-reproducible history.
    """
    # Without revisits a lattice of finite size caps the useful budget.
    budget = (
        cfg.max_iterations
        if cfg.allow_revisit
        else min(cfg.max_iterations, space.size)
    )
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(space.size)

    history = History()
    visited: set[ParamPoint] = set()
    failed: set[ParamPoint] = set()
    attempt = 0
    consecutive_failures = 0
    best: EvalRecord | None = None
    kernel = cfg.kernel
    fits = 0

    def try_evaluate(point: ParamPoint) -> bool:
        nonlocal attempt, consecutive_failures, best
        attempt += 1
        try:
            score, wall = _measure(objective, point)
        except EvaluationError as exc:
            history.failures.append(FailureRecord(attempt, point, str(exc)))
            failed.add(point)
            consecutive_failures += 1
            if consecutive_failures >= _MAX_CONSECUTIVE_FAILURES:
                raise RunAbortedError(
                    f"{consecutive_failures} consecutive evaluation failures "
                    f"(last: {exc})",
                    history,
                )
            return False
        record = EvalRecord(attempt, point, score, wall, objective.objective_id)
        history.records.append(record)
        visited.add(point)
        consecutive_failures = 0
        if best is None or record.score > best.score:
            best = record
        return True

    # Seeded random initial design, drawn without replacement.
    n_initial = min(cfg.n_initial, budget)
    cursor = 0
    while len(history.records) < n_initial and cursor < space.size:
        point = space.point_at(int(order[cursor]))
        cursor += 1
        if point in visited or point in failed:
            continue
        try_evaluate(point)

    # Model-guided phase.
    while len(history.records) < budget:
        xs = [space.normalize(r.point) for r in history.records]
        ys = [r.score for r in history.records]
        prior_mean = float(np.mean(ys))
        if fits % cfg.refit_period == 0:
            model = fit_grid_search(kernel, xs, ys)
            kernel = model.kernel
        else:
            model = fit(kernel, prior_mean, xs, ys)
        fits += 1

        incumbent = max(ys)
        acq = replace(cfg.acquisition, incumbent=incumbent)
        excluded = failed if cfg.allow_revisit else visited | failed
        try:
            point = select_next(model, space, acq, excluded)
        except SpaceExhaustedError:
            break  # clean early stop

        if not try_evaluate(point):
            # One retry at a different point via a fresh argmax; the failed
            # point is excluded even when revisits are allowed.
            try:
                retry = select_next(model, space, acq, visited | failed)
            except SpaceExhaustedError:
                break
            try_evaluate(retry)

    if best is None:
        raise RunAbortedError("no successful evaluations", history)
    return history, best
