"""Gaussian-process regression over normalized lattice points.

The surrogate is a GP with a squared-exponential kernel with per-dimension
length scales,

    k(x, x') = s * exp(-0.5 * sum_i ((x_i - x'_i) / l_i)^2),

observed through additive Gaussian noise of variance ``noise_variance``.
Fitting factorizes K + (noise + jitter) I by Cholesky decomposition; the
posterior at x* is

    mean     = prior_mean + k(x*, X) @ alpha
    variance = k(x*, x*) + noise - ||L^-1 k(X, x*)||^2   (clamped at 0)

Targets are standardized internally (centered on ``prior_mean``, scaled by
their standard deviation) which is equivalent to a GP whose signal and noise
variances are multiplied by that scale squared; posteriors are reported in
original units.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

LENGTH_SCALE_GRID = (0.05, 0.1, 0.2, 0.4, 0.8)

_JITTER_ESCALATIONS = 3  # extra attempts, each multiplying jitter by 10


class IllConditionedError(Exception):
    """Covariance factorization failed even after jitter escalation."""


@dataclass(frozen=True)
class KernelConfig:
    """Squared-exponential kernel hyperparameters.

    ``length_scale`` is either a scalar (shared across dimensions) or one
    value per dimension, in normalized [0, 1] units.
    """

    signal_variance: float = 1.0
    length_scale: float | tuple[float, ...] = 0.2
    noise_variance: float = 1e-6
    jitter: float = 1e-9

    def __post_init__(self):
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        scales = (
            self.length_scale
            if isinstance(self.length_scale, tuple)
            else (self.length_scale,)
        )
        if any(s <= 0 for s in scales):
            raise ValueError("every length_scale must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        if self.jitter <= 0:
            raise ValueError("jitter must be positive")

    def length_scales(self, dim: int) -> np.ndarray:
        if isinstance(self.length_scale, tuple):
            if len(self.length_scale) != dim:
                raise ValueError(
                    f"{len(self.length_scale)} length scales for {dim} dimensions"
                )
            return np.asarray(self.length_scale, dtype=float)
        return np.full(dim, float(self.length_scale))


def kernel_eval(cfg: KernelConfig, x: Sequence[float], x2: Sequence[float]) -> float:
    """Kernel value between two points (symmetric, equals signal at x == x')."""
    a = np.asarray(x, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"arity mismatch: {a.shape} vs {b.shape}")
    ls = cfg.length_scales(a.size)
    z = (a - b) / ls
    return cfg.signal_variance * math.exp(-0.5 * float(z @ z))


def kernel_matrix(
    cfg: KernelConfig, X: np.ndarray, X2: np.ndarray | None = None
) -> np.ndarray:
    """Cross-covariance matrix between two sets of row vectors."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = X / cfg.length_scales(X.shape[1])
    B = A if X2 is None else np.atleast_2d(np.asarray(X2, dtype=float)) / cfg.length_scales(X.shape[1])
    sq = (
        np.sum(A**2, axis=1)[:, None]
        + np.sum(B**2, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return cfg.signal_variance * np.exp(-0.5 * np.maximum(sq, 0.0))


@dataclass(frozen=True)
class Posterior:
    """Predictive distribution at one point, in original target units."""

    mean: float
    variance: float

    @property
    def stddev(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class GpModel:
    """Fitted surrogate: kernel, training data, and the Cholesky factor.

    ``train_x``/``train_y`` hold the merged training set (duplicate inputs
    averaged), ``factor`` the lower-triangular Cholesky factor of
    K + (noise + jitter_used) I, and ``alpha`` the solve of that matrix
    against the standardized targets.
    """

    kernel: KernelConfig
    prior_mean: float
    y_scale: float
    train_x: np.ndarray
    train_y: np.ndarray
    factor: np.ndarray
    alpha: np.ndarray
    jitter_used: float

    @property
    def dim(self) -> int:
        return self.train_x.shape[1]

    @property
    def prior_variance(self) -> float:
        """Prior predictive variance in original units (far from all data)."""
        return self.y_scale**2 * (
            self.kernel.signal_variance + self.kernel.noise_variance
        )

    def predict_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior means and variances at many points at once."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim}-dimensional inputs")
        k_star = kernel_matrix(self.kernel, X, self.train_x)  # (m, n)
        means = self.prior_mean + self.y_scale * (k_star @ self.alpha)
        v = np.linalg.solve(self.factor, k_star.T)  # (n, m)
        var_std = (
            self.kernel.signal_variance
            + self.kernel.noise_variance
            - np.sum(v**2, axis=0)
        )
        variances = self.y_scale**2 * np.maximum(var_std, 0.0)
        return means, variances

    def predict(self, x: Sequence[float]) -> Posterior:
        means, variances = self.predict_batch(np.asarray(x, dtype=float)[None, :])
        return Posterior(mean=float(means[0]), variance=float(variances[0]))


def _merge_duplicates(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average targets of identical rows, keeping first-occurrence order."""
    sums: dict[tuple, list] = {}
    order = []
    for row, target in zip(X, y):
        key = tuple(row)
        if key not in sums:
            sums[key] = [0.0, 0]
            order.append(key)
        sums[key][0] += target
        sums[key][1] += 1
    merged_x = np.array(order, dtype=float)
    merged_y = np.array([sums[k][0] / sums[k][1] for k in order])
    return merged_x, merged_y


def fit(
    kernel: KernelConfig,
    prior_mean: float,
    xs: Sequence[Sequence[float]],
    ys: Sequence[float],
) -> GpModel:
    """Fit a GP to normalized inputs and raw targets.

    Duplicate inputs are merged by averaging their targets first (avoids a
    singular covariance at near-zero noise).  If the Cholesky factorization
    fails, the jitter escalates by x10 up to three times before giving up.
    """
    X = np.atleast_2d(np.asarray(xs, dtype=float))
    y = np.asarray(ys, dtype=float)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} inputs vs {y.shape[0]} targets")
    if X.shape[0] < 1:
        raise ValueError("need at least one observation")

    X, y = _merge_duplicates(X, y)
    n = X.shape[0]
    y_scale = float(np.std(y)) if n >= 2 else 1.0
    if y_scale == 0.0:
        y_scale = 1.0
    t = (y - prior_mean) / y_scale

    K = kernel_matrix(kernel, X)
    jitter = kernel.jitter
    for attempt in range(_JITTER_ESCALATIONS + 1):
        try:
            factor = np.linalg.cholesky(
                K + (kernel.noise_variance + jitter) * np.eye(n)
            )
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
    else:
        raise IllConditionedError(
            f"covariance of {n} points not positive definite even with "
            f"jitter {jitter / 10.0:g}"
        )

    alpha = np.linalg.solve(factor.T, np.linalg.solve(factor, t))
    return GpModel(
        kernel=kernel,
        prior_mean=float(prior_mean),
        y_scale=y_scale,
        train_x=X,
        train_y=y,
        factor=factor,
        alpha=alpha,
        jitter_used=jitter,
    )


def fit_centered(
    kernel: KernelConfig, xs: Sequence[Sequence[float]], ys: Sequence[float]
) -> GpModel:
    """Fit with the prior mean set to the running mean of the targets."""
    return fit(kernel, float(np.mean(np.asarray(ys, dtype=float))), xs, ys)


def log_marginal_likelihood(model: GpModel) -> float:
    """Log evidence of the standardized targets under the fitted kernel."""
    t = (model.train_y - model.prior_mean) / model.y_scale
    n = t.size
    return float(
        -0.5 * t @ model.alpha
        - np.sum(np.log(np.diag(model.factor)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


def fit_grid_search(
    kernel: KernelConfig,
    xs: Sequence[Sequence[float]],
    ys: Sequence[float],
    grid: Sequence[float] = LENGTH_SCALE_GRID,
) -> GpModel:
    """Refit length scales by maximizing log marginal likelihood over a grid.

    The grid is the full per-dimension product, so this is intended for the
    low-dimensional spaces the exhaustive acquisition targets.  Ties resolve
    to the first combination in product order, keeping runs reproducible.
    """
    X = np.atleast_2d(np.asarray(xs, dtype=float))
    prior_mean = float(np.mean(np.asarray(ys, dtype=float)))
    best_model = None
    best_lml = -math.inf
    for combo in itertools.product(grid, repeat=X.shape[1]):
        candidate = replace(kernel, length_scale=tuple(combo))
        try:
            model = fit(candidate, prior_mean, X, ys)
        except IllConditionedError:
            continue
        lml = log_marginal_likelihood(model)
        if lml > best_lml:
            best_lml = lml
            best_model = model
    if best_model is None:
        raise IllConditionedError("no length-scale combination produced a valid fit")
    return best_model
