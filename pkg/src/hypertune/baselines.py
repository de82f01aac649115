"""Derivative-free comparison optimizers: trust-region linear search and PSO.

Both baselines search the continuous unit cube and snap trial points onto
the lattice for evaluation, which sidesteps integer-boundary mistakes while
keeping them honest: every objective call produces one history record, so
evaluation budgets are directly comparable with the Bayesian loop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .history import EvalRecord, FailureRecord, History
from .objectives import EvaluationError, Objective
from .space import ParamPoint, SearchSpace, lattice_arrays


@dataclass(frozen=True)
class CobylaConfig:
    """Trust-region linear-approximation search, normalized units."""

    rho_begin: float = 0.25
    rho_end: float = 0.02
    max_evals: int = 60
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho_end < self.rho_begin <= 0.5:
            raise ValueError("need 0 < rho_end < rho_begin <= 0.5")
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")


@dataclass(frozen=True)
class PsoConfig:
    n_particles: int = 8
    inertia: float = 0.65
    cognitive: float = 1.5
    social: float = 1.0
    max_iters: int = 25
    seed: int = 0
    v_max: float = 0.25

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("n_particles must be >= 2")
        if not 0.0 < self.inertia < 1.0:
            raise ValueError("inertia must lie in (0, 1)")
        if self.cognitive <= 0 or self.social <= 0:
            raise ValueError("cognitive and social weights must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_score: float


class _Evaluator:
    """Shared bookkeeping: one record per objective call, running best."""

    def __init__(self, space: SearchSpace, objective: Objective, max_evals: int):
        self.space = space
        self.objective = objective
        self.max_evals = max_evals
        self.history = History()
        self.best: EvalRecord | None = None
        self._attempt = 0

    @property
    def exhausted(self) -> bool:
        return self._attempt >= self.max_evals

    def __call__(self, point: ParamPoint) -> float | None:
        """Evaluate; returns the score or None on failure/budget exhaustion."""
        if self.exhausted:
            return None
        self._attempt += 1
        if self.objective.spec.kind == "builtin":
            start = None
        else:
            start = time.perf_counter()
        try:
            score = self.objective.evaluate(point)
        except EvaluationError as exc:
            self.history.failures.append(
                FailureRecord(self._attempt, point, str(exc))
            )
            return None
        wall = 0.0 if start is None else time.perf_counter() - start
        record = EvalRecord(
            self._attempt, point, score, wall, self.objective.objective_id
        )
        self.history.records.append(record)
        if self.best is None or score > self.best.score:
            self.best = record
        return score


def _finish(ev: _Evaluator) -> tuple[History, EvalRecord]:
    if ev.best is None:
        raise EvaluationError("no successful evaluations within budget")
    return ev.history, ev.best


def run_cobyla(
    space: SearchSpace, objective: Objective, cfg: CobylaConfig
) -> tuple[History, EvalRecord]:
    """Linear-interpolation trust-region search over the snapped lattice.

    Maintains a simplex of d+1 lattice-resident vertices in normalized
    space.  Each iteration fits the linear interpolant through the vertices,
    steps to its maximizer among lattice points within the current trust
    radius of the best vertex, and evaluates there; the worst vertex is
    replaced when the step improves on it, otherwise the radius halves.
    The search stops once the radius has bottomed out and stopped improving.
    """
    d = space.dim
    if cfg.max_evals < d + 2:
        raise ValueError(f"max_evals must be at least d + 2 = {d + 2}")
    rng = np.random.default_rng(cfg.seed)
    ev = _Evaluator(space, objective, cfg.max_evals)
    points, Z = lattice_arrays(space)

    # Axis resolutions in normalized units.  The trust region is an
    # ellipsoid measured in lattice steps (semi-axis rho/step_ref steps per
    # axis), which keeps coarse and fine axes equally mobile; a plain
    # Euclidean ball would let the finest axis dominate every proposal.
    steps = np.array(
        [
            p.multiple_of / (p.upper - p.lower) if p.upper > p.lower else 1.0
            for p in space.params
        ]
    )
    step_ref = float(steps.max())
    # Below one step of the coarsest axis the region cannot move that
    # coordinate at all, so the configured floor is raised to cover it.
    rho_floor = min(cfg.rho_begin, max(cfg.rho_end, step_ref))

    # Initial simplex: a random base corner plus one offset per axis,
    # flipped inward when the offset would leave the cube.
    base = rng.uniform(0.0, 1.0, d)
    offsets = [np.zeros(d)]
    for i in range(d):
        step = cfg.rho_begin if base[i] + cfg.rho_begin <= 1.0 else -cfg.rho_begin
        e = np.zeros(d)
        e[i] = step
        offsets.append(e)

    vertices: list[np.ndarray] = []
    scores: list[float] = []
    for off in offsets:
        raw = np.clip(base + off, 0.0, 1.0)
        point = space.snap_normalized(raw)
        score = ev(point)
        # Failed vertices stay in the simplex with a sentinel score so the
        # geometry keeps d+1 points; they are the first to be replaced.
        vertices.append(space.normalize(point))
        scores.append(score if score is not None else float("-inf"))

    rho = cfg.rho_begin
    # Points probed since the last vertex replacement; excluding them makes
    # floor-radius iterations sweep the whole neighborhood instead of
    # re-proposing one stale argmax.
    probed: set[ParamPoint] = set()
    while not ev.exhausted:
        order = np.argsort(scores)
        worst, best_idx = int(order[0]), int(order[-1])
        x_best = vertices[best_idx]

        # Linear interpolant through the simplex (least squares tolerates a
        # degenerate simplex after snapping).
        A = np.hstack([np.ones((d + 1, 1)), np.array(vertices)])
        coef, *_ = np.linalg.lstsq(A, np.array(scores), rcond=None)
        gradient = coef[1:]

        candidate = _trust_region_argmax(
            points, Z, x_best, rho / step_ref, steps, gradient, vertices, probed
        )
        if candidate is None:
            # Neighborhood exhausted without improvement.
            if rho <= rho_floor:
                break
            rho = max(rho * 0.5, rho_floor)
            probed.clear()
            continue

        score = ev(candidate)
        probed.add(candidate)
        if score is not None and score > scores[worst]:
            vertices[worst] = space.normalize(candidate)
            scores[worst] = score
            probed.clear()
        elif score is not None and rho > rho_floor:
            rho = max(rho * 0.5, rho_floor)

    return _finish(ev)


def _trust_region_argmax(
    points, Z, x_best, radius_steps, steps, gradient, vertices, probed
):
    """Best lattice point under the linear model within the trust region."""
    scaled = (Z - x_best) / steps
    inside = np.sum(scaled**2, axis=1) <= radius_steps**2 + 1e-12
    taken = {tuple(v) for v in vertices}
    mask = inside & np.array(
        [p not in probed and tuple(z) not in taken for p, z in zip(points, Z)]
    )
    if not mask.any():
        return None
    values = Z[mask] @ gradient
    chosen = np.flatnonzero(mask)[int(np.argmax(values))]
    return points[chosen]


def run_pso(
    space: SearchSpace,
    objective: Objective,
    cfg: PsoConfig,
    max_evals: int | None = None,
) -> tuple[History, EvalRecord]:
    """Standard global-best particle swarm on the unit cube.

    Velocity update per coordinate with seeded uniform factors r1, r2:

        v <- inertia * v + cognitive * r1 * (pbest - x) + social * r2 * (gbest - x)

    clamped to +/- v_max; positions clip to [0, 1] and evaluate at the
    snapped lattice point.  Evaluations are recorded in dispatch order
    (particle index within each iteration), and personal/global bests are
    merged after the full round, so runs are deterministic for a fixed seed.
    """
    d = space.dim
    rng = np.random.default_rng(cfg.seed)
    budget = max_evals if max_evals is not None else cfg.n_particles * (cfg.max_iters + 1)
    ev = _Evaluator(space, objective, budget)

    positions = rng.uniform(0.0, 1.0, (cfg.n_particles, d))
    velocities = rng.uniform(-cfg.v_max, cfg.v_max, (cfg.n_particles, d))
    swarm = [
        Particle(
            position=positions[i],
            velocity=velocities[i],
            best_position=positions[i].copy(),
            best_score=float("-inf"),
        )
        for i in range(cfg.n_particles)
    ]

    gbest_position: np.ndarray | None = None
    gbest_score = float("-inf")

    def evaluate_round() -> None:
        nonlocal gbest_position, gbest_score
        round_scores: list[float | None] = []
        for particle in swarm:
            if ev.exhausted:
                round_scores.append(None)
                continue
            round_scores.append(ev(space.snap_normalized(particle.position)))
        # Merge by particle index after the round; strict > keeps the
        # lowest-index particle on ties.
        for particle, score in zip(swarm, round_scores):
            if score is not None and score > particle.best_score:
                particle.best_score = score
                particle.best_position = particle.position.copy()
        for particle in swarm:
            if particle.best_score > gbest_score:
                gbest_score = particle.best_score
                gbest_position = particle.best_position.copy()

    evaluate_round()
    rounds = 0
    while not ev.exhausted and (max_evals is not None or rounds < cfg.max_iters):
        if gbest_position is None:
            break  # nothing succeeded yet; no direction to move in
        for particle in swarm:
            step_particle(cfg, rng, particle, gbest_position)
        evaluate_round()
        rounds += 1

    return _finish(ev)


def step_particle(
    cfg: PsoConfig, rng: np.random.Generator, particle: Particle, gbest: np.ndarray
) -> None:
    """One velocity/position update with per-coordinate uniform factors."""
    d = particle.position.size
    r1 = rng.uniform(size=d)
    r2 = rng.uniform(size=d)
    particle.velocity = (
        cfg.inertia * particle.velocity
        + cfg.cognitive * r1 * (particle.best_position - particle.position)
        + cfg.social * r2 * (gbest - particle.position)
    )
    np.clip(particle.velocity, -cfg.v_max, cfg.v_max, out=particle.velocity)
    particle.position = np.clip(particle.position + particle.velocity, 0.0, 1.0)


def run_random(
    space: SearchSpace, objective: Objective, seed: int, max_evals: int
) -> tuple[History, EvalRecord]:
    """Uniform sampling without replacement; debug baseline, not a method."""
    rng = np.random.default_rng(seed)
    ev = _Evaluator(space, objective, max_evals)
    for index in rng.permutation(space.size):
        if ev.exhausted:
            break
        ev(space.point_at(int(index)))
    return _finish(ev)
