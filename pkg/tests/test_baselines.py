import numpy as np
import pytest

from hypertune.baselines import (
    CobylaConfig,
    Particle,
    PsoConfig,
    run_cobyla,
    run_pso,
    run_random,
    step_particle,
)
from hypertune.objectives import EvaluationError, Objective, ObjectiveSpec, make_objective
from hypertune.space import ParamDef, SearchSpace, default_space


def sphere_objective(space):
    return make_objective(ObjectiveSpec("builtin", "sphere"), space)


def tie_free_space():
    # odd per-dimension counts put a unique lattice point at the center
    return SearchSpace(
        [
            ParamDef("a", 0, 10),
            ParamDef("b", 0, 20, multiple_of=2),
            ParamDef("c", 1, 9),
        ]
    )


class MonotoneDown(Objective):
    """Score decreases with the (single) coordinate; optimum at the low bound."""

    def __init__(self, space):
        super().__init__(ObjectiveSpec("builtin", "sphere"), space)

    def evaluate(self, point):
        return -float(point[0])


class ConstantObjective(Objective):
    def __init__(self, space):
        super().__init__(ObjectiveSpec("builtin", "sphere"), space)

    def evaluate(self, point):
        return 0.5


class FailEveryOther(Objective):
    def __init__(self, space):
        super().__init__(ObjectiveSpec("builtin", "sphere"), space)
        self.calls = 0

    def evaluate(self, point):
        self.calls += 1
        if self.calls % 2 == 0:
            raise EvaluationError("flaky")
        x = self.space.normalize(point)
        return -float(((x - 0.5) ** 2).sum())


def test_config_validation():
    with pytest.raises(ValueError):
        CobylaConfig(rho_begin=0.6)
    with pytest.raises(ValueError):
        CobylaConfig(rho_begin=0.1, rho_end=0.2)
    with pytest.raises(ValueError):
        PsoConfig(n_particles=1)
    with pytest.raises(ValueError):
        PsoConfig(inertia=1.0)
    with pytest.raises(ValueError):
        PsoConfig(social=0.0)
    with pytest.raises(ValueError):
        PsoConfig(v_max=0.0)


# --- cobyla ------------------------------------------------------------------


def test_cobyla_requires_minimum_budget():
    space = tie_free_space()
    with pytest.raises(ValueError):
        run_cobyla(space, sphere_objective(space), CobylaConfig(max_evals=4))


def test_cobyla_monotone_1d_converges_to_boundary():
    space = SearchSpace([ParamDef("v", 0, 30)])
    for seed in range(5):
        history, best = run_cobyla(
            space, MonotoneDown(space), CobylaConfig(seed=seed, max_evals=40)
        )
        assert best.point == (0,), seed


def test_cobyla_sphere_finds_lattice_center_budget_60():
    space = tie_free_space()
    objective = sphere_objective(space)
    target = max(space.enumerate_points(), key=objective.evaluate)
    assert target == (5, 10, 5)
    for seed in range(5):
        history, best = run_cobyla(
            space, sphere_objective(space), CobylaConfig(seed=seed, max_evals=60)
        )
        assert best.point == target, seed


def test_cobyla_constant_objective_stops_and_keeps_first():
    space = tie_free_space()
    history, best = run_cobyla(
        space, ConstantObjective(space), CobylaConfig(seed=0, max_evals=500)
    )
    assert best.iteration == history.records[0].iteration
    assert len(history.records) < 500  # converged before the budget


def test_cobyla_every_point_valid_and_best_so_far_monotone():
    space = default_space()
    obj = make_objective(ObjectiveSpec("builtin", "gan_proxy"), space)
    history, best = run_cobyla(space, obj, CobylaConfig(seed=3, max_evals=80))
    assert all(space.validate(r.point) for r in history.records)
    trace = history.best_so_far()
    assert all(x <= y for x, y in zip(trace, trace[1:]))


def test_cobyla_records_failures_without_replacing_vertices():
    space = tie_free_space()
    obj = FailEveryOther(space)
    history, best = run_cobyla(space, obj, CobylaConfig(seed=1, max_evals=30))
    assert history.failures
    assert history.records
    assert best.score == max(r.score for r in history.records)


def test_cobyla_deterministic():
    space = default_space()
    mk = lambda: make_objective(ObjectiveSpec("builtin", "gan_proxy"), space)
    cfg = CobylaConfig(seed=9, max_evals=50)
    h1, _ = run_cobyla(space, mk(), cfg)
    h2, _ = run_cobyla(space, mk(), cfg)
    assert [(r.point, r.score) for r in h1.records] == [
        (r.point, r.score) for r in h2.records
    ]


# --- pso ---------------------------------------------------------------------


def test_pso_fixed_point_of_update():
    cfg = PsoConfig(seed=0)
    rng = np.random.default_rng(0)
    x = np.array([0.3, 0.7])
    particle = Particle(
        position=x.copy(),
        velocity=np.zeros(2),
        best_position=x.copy(),
        best_score=1.0,
    )
    step_particle(cfg, rng, particle, gbest=x.copy())
    assert np.array_equal(particle.velocity, np.zeros(2))
    assert np.array_equal(particle.position, x)


def test_pso_velocity_decays_geometrically_without_attraction():
    # pbest == gbest == position makes both attraction terms vanish, so the
    # velocity just scales by the inertia every step.
    cfg = PsoConfig(inertia=0.5, seed=0, v_max=10.0)
    rng = np.random.default_rng(1)
    x = np.array([0.5, 0.5, 0.5])
    particle = Particle(
        position=x.copy(),
        velocity=np.array([0.08, -0.04, 0.02]),
        best_position=x.copy(),
        best_score=0.0,
    )
    previous = np.abs(particle.velocity).max()
    for _ in range(20):
        step_particle(cfg, rng, particle, gbest=particle.position.copy())
        # attraction terms are zero only if position tracks the attractors
        particle.best_position = particle.position.copy()
        current = np.abs(particle.velocity).max()
        assert current <= 0.5 * previous + 1e-15
        previous = current
    assert previous < 1e-6


def test_pso_sphere_seed7_finds_lattice_argmax():
    space = tie_free_space()
    objective = sphere_objective(space)
    target = max(space.enumerate_points(), key=objective.evaluate)
    history, best = run_pso(
        space,
        sphere_objective(space),
        PsoConfig(n_particles=8, max_iters=20, seed=7),
    )
    assert best.point == target


def test_pso_budget_cap_and_dispatch_order():
    space = tie_free_space()
    history, best = run_pso(
        space, sphere_objective(space), PsoConfig(seed=2), max_evals=19
    )
    assert len(history.records) == 19
    assert [r.iteration for r in history.records] == list(range(1, 20))


def test_pso_per_particle_best_monotone():
    space = tie_free_space()
    cfg = PsoConfig(n_particles=4, max_iters=10, seed=5)
    history, _ = run_pso(space, sphere_objective(space), cfg)
    # dispatch order is particle index within each full round
    per_particle = {i: [] for i in range(cfg.n_particles)}
    for idx, rec in enumerate(history.records):
        per_particle[idx % cfg.n_particles].append(rec.score)
    for series in per_particle.values():
        running = [max(series[: i + 1]) for i in range(len(series))]
        assert all(x <= y for x, y in zip(running, running[1:]))


def test_pso_failures_are_recorded_and_skipped():
    space = tie_free_space()
    obj = FailEveryOther(space)
    history, best = run_pso(space, obj, PsoConfig(seed=3, max_iters=5))
    assert history.failures
    assert len(history.records) + len(history.failures) == obj.calls


def test_pso_deterministic():
    space = default_space()
    mk = lambda: make_objective(ObjectiveSpec("builtin", "gan_proxy"), space)
    cfg = PsoConfig(seed=13, max_iters=8)
    h1, _ = run_pso(space, mk(), cfg)
    h2, _ = run_pso(space, mk(), cfg)
    assert [(r.point, r.score) for r in h1.records] == [
        (r.point, r.score) for r in h2.records
    ]


def test_pso_all_points_valid():
    space = default_space()
    obj = make_objective(ObjectiveSpec("builtin", "gan_proxy"), space)
    history, _ = run_pso(space, obj, PsoConfig(seed=1, max_iters=6))
    assert all(space.validate(r.point) for r in history.records)


# --- random ------------------------------------------------------------------


def test_random_full_coverage_finds_global_max():
    space = SearchSpace([ParamDef("a", 0, 6), ParamDef("b", 0, 5)])
    objective = sphere_objective(space)
    target = max(space.enumerate_points(), key=objective.evaluate)
    history, best = run_random(space, sphere_objective(space), seed=0, max_evals=space.size)
    assert best.point == target
    points = [r.point for r in history.records]
    assert len(set(points)) == len(points) == space.size


def test_random_respects_budget():
    space = default_space()
    history, _ = run_random(space, sphere_objective(space), seed=1, max_evals=25)
    assert len(history.records) == 25
