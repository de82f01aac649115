"""Bounded integer hyperparameter lattices.

A :class:`SearchSpace` is an ordered list of integer parameters, each with
inclusive bounds and an optional divisibility constraint (e.g. a channel
count that must be a multiple of 4).  The set of valid parameter combinations
forms a finite lattice; optimizers either walk it directly or search the
continuous unit cube and snap trial points back onto it.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# A point on the lattice: one integer per parameter, in declaration order.
ParamPoint = tuple[int, ...]

ENUMERATION_CAP = 1_000_000


class LatticeTooLargeError(Exception):
    """Raised when full enumeration is requested on an oversized lattice."""


@dataclass(frozen=True)
class ParamDef:
    """One integer parameter: inclusive bounds plus a divisibility constraint.

    ``multiple_of=1`` means unconstrained.
    """

    name: str
    lower: int
    upper: int
    multiple_of: int = 1

    def __post_init__(self):
        if not self.name:
            raise ValueError("parameter name must be non-empty")
        if self.lower > self.upper:
            raise ValueError(
                f"{self.name}: lower bound {self.lower} exceeds upper bound {self.upper}"
            )
        if self.multiple_of < 1:
            raise ValueError(f"{self.name}: multiple_of must be >= 1")
        if self.first_valid > self.upper:
            raise ValueError(
                f"{self.name}: no multiple of {self.multiple_of} "
                f"in [{self.lower}, {self.upper}]"
            )

    @property
    def first_valid(self) -> int:
        # ceil(lower / multiple_of) * multiple_of, in exact integer arithmetic
        return -((-self.lower) // self.multiple_of) * self.multiple_of

    @property
    def last_valid(self) -> int:
        return (self.upper // self.multiple_of) * self.multiple_of

    @property
    def count(self) -> int:
        return (self.last_valid - self.first_valid) // self.multiple_of + 1

    def values(self) -> range:
        """All valid values, ascending."""
        return range(self.first_valid, self.last_valid + 1, self.multiple_of)

    def contains(self, value: int) -> bool:
        return self.lower <= value <= self.upper and value % self.multiple_of == 0

    def snap_value(self, raw: float) -> int:
        """Clamp ``raw`` to the bounds and round to the nearest valid value.

        Exact ties between two multiples round down, so the result is
        deterministic across platforms.
        """
        x = min(max(float(raw), self.lower), self.upper)
        q = math.ceil(x / self.multiple_of - 0.5)  # nearest integer, ties down
        v = q * self.multiple_of
        return min(max(v, self.first_valid), self.last_valid)


@dataclass(frozen=True)
class SearchSpace:
    """An ordered collection of :class:`ParamDef` defining the lattice."""

    params: tuple[ParamDef, ...]

    def __init__(self, params: Iterable[ParamDef]):
        object.__setattr__(self, "params", tuple(params))
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names: {names}")
        if not self.params:
            raise ValueError("search space needs at least one parameter")

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    @property
    def size(self) -> int:
        """Number of valid lattice points (product of per-dimension counts)."""
        return math.prod(p.count for p in self.params)

    def _check_arity(self, values: Sequence) -> None:
        if len(values) != self.dim:
            raise ValueError(
                f"expected {self.dim} coordinates, got {len(values)}"
            )

    def validate(self, point: Sequence[int]) -> bool:
        """True iff every coordinate is in bounds and divisible as required."""
        self._check_arity(point)
        return all(p.contains(v) for p, v in zip(self.params, point))

    def enumerate_points(self, cap: int = ENUMERATION_CAP) -> list[ParamPoint]:
        """All valid points, lexicographic by parameter index then value.

        Refuses lattices larger than ``cap``; exhaustive enumeration is only
        meant for desk-scale spaces.
        """
        if self.size > cap:
            raise LatticeTooLargeError(
                f"lattice has {self.size} points, enumeration cap is {cap}"
            )
        return list(itertools.product(*(p.values() for p in self.params)))

    def point_at(self, index: int) -> ParamPoint:
        """The ``index``-th point in enumeration order (mixed-radix decode)."""
        if not 0 <= index < self.size:
            raise IndexError(f"lattice index {index} out of range [0, {self.size})")
        digits = []
        for p in reversed(self.params):
            index, r = divmod(index, p.count)
            digits.append(p.first_valid + r * p.multiple_of)
        return tuple(reversed(digits))

    def normalize(self, point: Sequence[int]) -> np.ndarray:
        """Map a valid point to [0, 1]^d; degenerate dimensions map to 0."""
        if not self.validate(point):
            raise ValueError(f"invalid point {tuple(point)} for space {self.names}")
        out = np.zeros(self.dim)
        for i, (p, v) in enumerate(zip(self.params, point)):
            span = p.upper - p.lower
            out[i] = (v - p.lower) / span if span else 0.0
        return out

    def denormalize(self, x: Sequence[float]) -> np.ndarray:
        """Inverse of :meth:`normalize` as a real vector (not snapped)."""
        self._check_arity(x)
        return np.array(
            [p.lower + float(c) * (p.upper - p.lower) for p, c in zip(self.params, x)]
        )

    def snap(self, raw: Sequence[float]) -> ParamPoint:
        """Nearest valid lattice point to a raw real vector (original units)."""
        self._check_arity(raw)
        return tuple(p.snap_value(v) for p, v in zip(self.params, raw))

    def snap_normalized(self, x: Sequence[float]) -> ParamPoint:
        """Snap a point expressed in normalized [0, 1] coordinates."""
        return self.snap(self.denormalize(x))

    def point_as_dict(self, point: Sequence[int]) -> dict[str, int]:
        self._check_arity(point)
        return {p.name: int(v) for p, v in zip(self.params, point)}

    def point_from_dict(self, values: dict[str, int]) -> ParamPoint:
        try:
            return tuple(int(values[name]) for name in self.names)
        except KeyError as exc:
            raise ValueError(f"missing parameter {exc.args[0]!r}") from exc

    def to_json(self) -> list[dict]:
        return [
            {
                "name": p.name,
                "lower": p.lower,
                "upper": p.upper,
                "multiple_of": p.multiple_of,
            }
            for p in self.params
        ]

    @classmethod
    def from_json(cls, data: Iterable[dict]) -> "SearchSpace":
        return cls(
            ParamDef(
                name=d["name"],
                lower=int(d["lower"]),
                upper=int(d["upper"]),
                multiple_of=int(d.get("multiple_of", 1)),
            )
            for d in data
        )


def default_space() -> SearchSpace:
    """The shipped default: generator depth m, width n (multiple of 4),
    discriminator depth k."""
    return SearchSpace(
        [
            ParamDef("m", 2, 11),
            ParamDef("n", 64, 256, multiple_of=4),
            ParamDef("k", 2, 10),
        ]
    )


@functools.lru_cache(maxsize=8)
def lattice_arrays(space: SearchSpace) -> tuple[tuple[ParamPoint, ...], np.ndarray]:
    """Enumerated points plus their normalized coordinates, cached per space."""
    points = tuple(space.enumerate_points())
    norm = np.array([space.normalize(p) for p in points])
    norm.setflags(write=False)
    return points, norm
