import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertune.space import (
    LatticeTooLargeError,
    ParamDef,
    SearchSpace,
    default_space,
)


def brute_force_points(space):
    """Oracle: filter the full bounding box by the validity predicate."""
    import itertools

    boxes = [range(p.lower, p.upper + 1) for p in space.params]
    return [
        pt
        for pt in itertools.product(*boxes)
        if all(v % p.multiple_of == 0 for p, v in zip(space.params, pt))
    ]


def test_param_def_rejects_bad_bounds():
    with pytest.raises(ValueError):
        ParamDef("x", 5, 4)
    with pytest.raises(ValueError):
        ParamDef("x", 1, 2, multiple_of=4)  # no multiple of 4 in [1, 2]
    with pytest.raises(ValueError):
        ParamDef("x", 0, 3, multiple_of=0)


def test_space_rejects_duplicate_names():
    with pytest.raises(ValueError):
        SearchSpace([ParamDef("a", 0, 1), ParamDef("a", 0, 1)])


def test_validate_examples():
    space = default_space()
    assert space.validate((3, 140, 3)) is True
    assert space.validate((3, 130, 3)) is False
    assert space.validate((2, 64, 2)) is True


def test_validate_arity_mismatch_raises():
    with pytest.raises(ValueError):
        default_space().validate((3, 140))


def test_enumerate_default_space_has_4410_points():
    space = default_space()
    points = space.enumerate_points()
    assert len(points) == 4410
    assert space.size == 4410
    # per-dimension counts: 10 x 49 x 9
    assert [p.count for p in space.params] == [10, 49, 9]


def test_enumerate_matches_brute_force_filter():
    space = SearchSpace(
        [ParamDef("a", 1, 7, multiple_of=3), ParamDef("b", -2, 2, multiple_of=2)]
    )
    assert space.enumerate_points() == brute_force_points(space)


def test_enumerate_singleton_and_filtered():
    assert SearchSpace([ParamDef("v", 0, 0)]).enumerate_points() == [(0,)]
    assert SearchSpace([ParamDef("v", 1, 7, multiple_of=3)]).enumerate_points() == [
        (3,),
        (6,),
    ]


def test_enumerate_cap():
    space = SearchSpace([ParamDef("a", 0, 999), ParamDef("b", 0, 1999)])
    with pytest.raises(LatticeTooLargeError):
        space.enumerate_points(cap=10_000)


def test_point_at_matches_enumeration_order():
    space = SearchSpace(
        [ParamDef("a", 2, 5), ParamDef("b", 0, 9, multiple_of=3), ParamDef("c", -1, 1)]
    )
    points = space.enumerate_points()
    assert [space.point_at(i) for i in range(space.size)] == points


def test_validate_iff_member_of_enumeration():
    space = SearchSpace(
        [ParamDef("a", 0, 5, multiple_of=2), ParamDef("b", 1, 4)]
    )
    members = set(space.enumerate_points())
    for a in range(-1, 7):
        for b in range(0, 6):
            inside = 0 <= a <= 5 and 1 <= b <= 4
            if not inside:
                continue  # bounds go first; validate() is defined on the box
            assert space.validate((a, b)) == ((a, b) in members)


def test_normalize_examples():
    space = default_space()
    np.testing.assert_allclose(space.normalize((2, 64, 2)), [0.0, 0.0, 0.0])
    assert space.normalize((2, 160, 2))[1] == 0.5
    np.testing.assert_allclose(space.normalize((11, 256, 10)), [1.0, 1.0, 1.0])


def test_normalize_rejects_invalid_point():
    with pytest.raises(ValueError):
        default_space().normalize((3, 130, 3))


def test_normalize_degenerate_dimension_maps_to_zero():
    space = SearchSpace([ParamDef("v", 5, 5)])
    assert space.normalize((5,)) == 0.0


def test_snap_examples():
    space = default_space()
    assert space.snap((3.2, 129.9, 3.1)) == (3, 128, 3)
    assert space.snap((3, 300, 3)) == (3, 256, 3)
    assert space.snap((3, 130, 3)) == (3, 128, 3)  # exact tie rounds down


def test_snap_clamps_to_valid_multiples():
    # nearest multiple of 3 to clamped 1.0 is 0, which is out of bounds
    space = SearchSpace([ParamDef("v", 1, 7, multiple_of=3)])
    assert space.snap((0.5,)) == (3,)
    assert space.snap((100.0,)) == (6,)


def test_snap_exhaustive_nearest_multiple_oracle():
    pdef = ParamDef("n", 64, 256, multiple_of=4)
    valid = list(pdef.values())
    for raw in np.arange(60.0, 260.0, 0.37):
        got = pdef.snap_value(raw)
        clamped = min(max(raw, 64), 256)
        best = min(valid, key=lambda v: (abs(v - clamped), v))
        assert got == best, (raw, got, best)


small_spaces = st.lists(
    st.tuples(st.integers(-20, 20), st.integers(0, 30), st.integers(1, 7)).map(
        lambda t: (t[0], t[0] + t[1], t[2])
    ),
    min_size=1,
    max_size=3,
).filter(
    lambda dims: all(
        -((-lo) // m) * m <= hi for lo, hi, m in dims
    )
)


@st.composite
def space_and_point(draw):
    dims = draw(small_spaces)
    space = SearchSpace(
        [ParamDef(f"p{i}", lo, hi, m) for i, (lo, hi, m) in enumerate(dims)]
    )
    index = draw(st.integers(0, space.size - 1))
    return space, space.point_at(index)


@settings(max_examples=200, deadline=None)
@given(space_and_point())
def test_snap_recovers_point_within_half_step(sp):
    space, point = sp
    rng = np.random.default_rng(abs(hash(point)) % 2**32)
    # perturb strictly inside half a lattice step per dimension
    delta = [
        (rng.uniform(-0.499, 0.499)) * p.multiple_of for p in space.params
    ]
    raw = [v + d for v, d in zip(point, delta)]
    assert space.snap(raw) == point


@settings(max_examples=200, deadline=None)
@given(space_and_point())
def test_snap_idempotent_and_valid(sp):
    space, point = sp
    snapped = space.snap([float(v) for v in point])
    assert snapped == point
    assert space.validate(snapped)


@settings(max_examples=100, deadline=None)
@given(space_and_point())
def test_normalize_in_unit_cube(sp):
    space, point = sp
    x = space.normalize(point)
    assert np.all(x >= 0.0) and np.all(x <= 1.0)
    assert space.snap_normalized(x) == point


@settings(max_examples=50, deadline=None)
@given(small_spaces)
def test_enumeration_count_matches_analytic_product(dims):
    space = SearchSpace(
        [ParamDef(f"p{i}", lo, hi, m) for i, (lo, hi, m) in enumerate(dims)]
    )
    if space.size > 20_000:
        return
    points = space.enumerate_points()
    assert len(points) == space.size
    assert len(points) == len(brute_force_points(space))
    assert len(set(points)) == len(points)


def test_json_round_trip():
    space = default_space()
    again = SearchSpace.from_json(space.to_json())
    assert again == space
    assert again.names == ("m", "n", "k")


def test_point_dict_round_trip():
    space = default_space()
    d = space.point_as_dict((3, 140, 3))
    assert d == {"m": 3, "n": 140, "k": 3}
    assert space.point_from_dict(d) == (3, 140, 3)
    with pytest.raises(ValueError):
        space.point_from_dict({"m": 3, "n": 140})
