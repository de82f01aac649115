import pytest

from hypertune.bo import BoConfig, RunAbortedError, run_bo
from hypertune.objectives import (
    EvaluationError,
    Objective,
    ObjectiveSpec,
    gan_proxy,
    make_objective,
)
from hypertune.space import ParamDef, SearchSpace, default_space


def proxy_objective():
    return make_objective(ObjectiveSpec("builtin", "gan_proxy"), default_space())


class FlakyObjective(Objective):
    """Fails the first ``n_failures`` calls, then behaves like sphere."""

    def __init__(self, space, n_failures):
        super().__init__(ObjectiveSpec("builtin", "sphere"), space)
        self.remaining = n_failures
        self.calls = 0

    def evaluate(self, point):
        self.calls += 1
        if self.remaining > 0:
            self.remaining -= 1
            raise EvaluationError("transient crash")
        x = self.space.normalize(point)
        return -float(((x - 0.5) ** 2).sum())


class ConstantObjective(Objective):
    def __init__(self, space):
        super().__init__(ObjectiveSpec("builtin", "sphere"), space)

    def evaluate(self, point):
        return 1.25


def small_space():
    return SearchSpace([ParamDef("a", 0, 4), ParamDef("b", 0, 6, multiple_of=2)])


def test_single_point_lattice_forces_one_evaluation():
    space = SearchSpace([ParamDef("only", 3, 3)])
    obj = ConstantObjective(space)
    history, best = run_bo(space, obj, BoConfig(max_iterations=10, seed=0))
    assert len(history.records) == 1
    assert best.point == (3,)


def test_finds_proxy_peak_seed42_within_30():
    history, best = run_bo(
        default_space(), proxy_objective(), BoConfig(max_iterations=30, seed=42)
    )
    assert best.point == (3, 140, 3)
    assert best.score == pytest.approx(gan_proxy((3, 140, 3)))
    assert max(history.best_so_far()) == pytest.approx(gan_proxy((3, 140, 3)))


def test_constant_objective_keeps_running_and_best_is_first():
    space = small_space()
    history, best = run_bo(space, ConstantObjective(space), BoConfig(max_iterations=8, seed=1))
    assert len(history.records) == 8
    assert best.iteration == history.records[0].iteration
    # all evaluated points distinct and valid
    points = [r.point for r in history.records]
    assert len(set(points)) == len(points)
    assert all(space.validate(p) for p in points)


def test_best_so_far_is_monotone_and_matches_best():
    history, best = run_bo(
        default_space(), proxy_objective(), BoConfig(max_iterations=25, seed=5)
    )
    trace = history.best_so_far()
    assert all(x <= y for x, y in zip(trace, trace[1:]))
    assert trace[-1] == best.score
    assert best.score == max(r.score for r in history.records)


def test_iterations_strictly_increasing_across_records_and_failures():
    space = small_space()
    obj = FlakyObjective(space, n_failures=2)
    history, best = run_bo(space, obj, BoConfig(max_iterations=6, seed=3))
    iterations = sorted(
        [r.iteration for r in history.records] + [f.iteration for f in history.failures]
    )
    assert iterations == list(range(1, len(iterations) + 1))
    assert len(history.failures) == 2
    assert len(history.records) == 6


def test_exhausts_small_lattice_cleanly():
    space = SearchSpace([ParamDef("a", 0, 3)])
    obj = ConstantObjective(space)
    history, best = run_bo(space, obj, BoConfig(max_iterations=50, seed=2))
    assert len(history.records) == 4
    assert {r.point for r in history.records} == {(0,), (1,), (2,), (3,)}


def test_three_consecutive_failures_abort_with_partial_history():
    space = small_space()
    obj = FlakyObjective(space, n_failures=100)
    with pytest.raises(RunAbortedError) as err:
        run_bo(space, obj, BoConfig(max_iterations=6, seed=3))
    assert len(err.value.history.failures) == 3
    assert err.value.history.records == []


def test_failure_then_recovery_records_failures():
    space = small_space()
    obj = FlakyObjective(space, n_failures=2)
    history, best = run_bo(space, obj, BoConfig(max_iterations=5, seed=7))
    assert len(history.records) == 5
    assert len(history.failures) == 2
    failed_points = {f.point for f in history.failures}
    evaluated = {r.point for r in history.records}
    assert failed_points.isdisjoint(evaluated)  # failed points stay excluded


def test_deterministic_given_seed():
    cfg = BoConfig(max_iterations=20, seed=11)
    h1, b1 = run_bo(default_space(), proxy_objective(), cfg)
    h2, b2 = run_bo(default_space(), proxy_objective(), cfg)
    assert [(r.iteration, r.point, r.score) for r in h1.records] == [
        (r.iteration, r.point, r.score) for r in h2.records
    ]
    assert b1 == b2


def test_different_seeds_differ():
    h1, _ = run_bo(default_space(), proxy_objective(), BoConfig(max_iterations=10, seed=1))
    h2, _ = run_bo(default_space(), proxy_objective(), BoConfig(max_iterations=10, seed=2))
    assert [r.point for r in h1.records] != [r.point for r in h2.records]


def test_all_records_validate():
    history, _ = run_bo(
        default_space(), proxy_objective(), BoConfig(max_iterations=15, seed=9)
    )
    space = default_space()
    assert all(space.validate(r.point) for r in history.records)


def test_allow_revisit_permits_duplicates():
    space = SearchSpace([ParamDef("a", 0, 2)])
    obj = ConstantObjective(space)
    cfg = BoConfig(max_iterations=6, seed=0, allow_revisit=True, n_initial=1)
    history, _ = run_bo(space, obj, cfg)
    assert len(history.records) == 6  # budget honored even though |lattice| = 3
    points = [r.point for r in history.records]
    assert len(set(points)) < len(points)


def test_builtin_wall_time_is_zero():
    history, _ = run_bo(
        default_space(), proxy_objective(), BoConfig(max_iterations=5, seed=4)
    )
    assert all(r.wall_time == 0.0 for r in history.records)


def test_config_validation():
    with pytest.raises(ValueError):
        BoConfig(max_iterations=0)
    with pytest.raises(ValueError):
        BoConfig(n_initial=0)
    with pytest.raises(ValueError):
        BoConfig(refit_period=0)
