"""Acquisition functions and exhaustive next-point selection.

Two scores are provided: the upper confidence bound

    ucb = mean + lambda * stddev      (lambda defaults to 1)

and the probability of improvement over the incumbent (best observed score)

    pi = Phi((mean - incumbent) / stddev).

``select_next`` scores every unvisited lattice point and returns the argmax,
breaking ties by enumeration order.  The lattice is small and integer-valued,
so exhaustive scoring is exact and removes a stochastic inner optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gp import GpModel, Posterior
from .space import ParamPoint, SearchSpace, lattice_arrays

UCB = "ucb"
PI = "pi"


class SpaceExhaustedError(Exception):
    """Every lattice point has been visited; the search loop should stop."""


@dataclass(frozen=True)
class AcquisitionConfig:
    """Which score to use and its parameters.

    ``incumbent`` is only consulted by PI and holds the best observed score;
    the optimizer loop keeps it current.
    """

    kind: str = UCB
    lam: float = 1.0
    incumbent: float | None = None

    def __post_init__(self):
        if self.kind not in (UCB, PI):
            raise ValueError(f"unknown acquisition kind {self.kind!r}")
        if not math.isfinite(self.lam):
            raise ValueError("lambda must be finite")


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def ucb(post: Posterior, lam: float) -> float:
    return post.mean + lam * post.stddev


def probability_of_improvement(post: Posterior, incumbent: float) -> float:
    """P(score >= incumbent); degenerates to a step function at zero spread."""
    sigma = post.stddev
    if sigma == 0.0:
        return 1.0 if post.mean >= incumbent else 0.0
    return normal_cdf((post.mean - incumbent) / sigma)


def acquisition_values(
    cfg: AcquisitionConfig, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    """Vectorized acquisition scores for batches of posterior moments."""
    stddevs = np.sqrt(np.maximum(variances, 0.0))
    if cfg.kind == UCB:
        return means + cfg.lam * stddevs
    if cfg.incumbent is None:
        raise ValueError("probability of improvement needs an incumbent")
    out = np.empty_like(means)
    zero = stddevs == 0.0
    out[zero] = (means[zero] >= cfg.incumbent).astype(float)
    nz = ~zero
    z = (means[nz] - cfg.incumbent) / stddevs[nz]
    out[nz] = [normal_cdf(v) for v in z]
    return out


def select_next(
    model: GpModel,
    space: SearchSpace,
    cfg: AcquisitionConfig,
    visited: set[ParamPoint],
) -> ParamPoint:
    """The unvisited lattice point with the highest acquisition value.

    Ties go to the earliest point in enumeration order (``np.argmax``
    returns the first maximum), so selection is deterministic.
    """
    points, norm = lattice_arrays(space)
    if visited:
        mask = np.array([p not in visited for p in points])
        if not mask.any():
            raise SpaceExhaustedError(f"all {len(points)} lattice points visited")
        candidates = [p for p, keep in zip(points, mask) if keep]
        X = norm[mask]
    else:
        candidates = list(points)
        X = norm
    means, variances = model.predict_batch(X)
    values = acquisition_values(cfg, means, variances)
    return candidates[int(np.argmax(values))]
