import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertune.gp import (
    GpModel,
    IllConditionedError,
    KernelConfig,
    fit,
    fit_centered,
    fit_grid_search,
    kernel_eval,
    kernel_matrix,
    log_marginal_likelihood,
)


def naive_predict(kernel, prior_mean, xs, ys, x_star):
    """Independent oracle: explicit-inverse GP with the same standardization
    pipeline (duplicate rows averaged, targets centered and scaled)."""
    merged = {}
    order = []
    for row, y in zip(np.atleast_2d(np.asarray(xs, float)), ys):
        key = tuple(row)
        if key not in merged:
            merged[key] = []
            order.append(key)
        merged[key].append(y)
    X = np.array(order)
    y = np.array([np.mean(merged[k]) for k in order])
    scale = float(np.std(y)) if len(y) >= 2 else 1.0
    if scale == 0.0:
        scale = 1.0
    t = (y - prior_mean) / scale

    n = len(y)
    ls = kernel.length_scales(X.shape[1])

    def k(a, b):
        z = (np.asarray(a) - np.asarray(b)) / ls
        return kernel.signal_variance * math.exp(-0.5 * float(z @ z))

    K = np.array([[k(X[i], X[j]) for j in range(n)] for i in range(n)])
    K_noisy = K + (kernel.noise_variance + kernel.jitter) * np.eye(n)
    K_inv = np.linalg.inv(K_noisy)
    k_star = np.array([k(x_star, X[i]) for i in range(n)])
    mean = prior_mean + scale * float(k_star @ K_inv @ t)
    var_std = k(x_star, x_star) + kernel.noise_variance - float(
        k_star @ K_inv @ k_star
    )
    return mean, scale**2 * max(var_std, 0.0)


def test_kernel_eval_examples():
    cfg = KernelConfig(signal_variance=1.0, length_scale=1.0)
    assert kernel_eval(cfg, [0.3, 0.7], [0.3, 0.7]) == 1.0
    value = kernel_eval(cfg, [0.0], [1.0])
    assert value == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert kernel_eval(cfg, [0.0], [1.0]) == kernel_eval(cfg, [1.0], [0.0])


def test_kernel_eval_independent_scalar_cross_check():
    cfg = KernelConfig(signal_variance=2.5, length_scale=(0.2, 0.5))
    x, y = [0.1, 0.9], [0.4, 0.3]
    expected = 2.5 * math.exp(-0.5 * ((0.3 / 0.2) ** 2 + (0.6 / 0.5) ** 2))
    assert kernel_eval(cfg, x, y) == pytest.approx(expected, rel=1e-12)


def test_kernel_eval_arity_mismatch():
    with pytest.raises(ValueError):
        kernel_eval(KernelConfig(), [0.0], [0.0, 1.0])


def test_kernel_matrix_agrees_with_kernel_eval():
    cfg = KernelConfig(length_scale=(0.3, 0.7, 0.2))
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(6, 3))
    K = kernel_matrix(cfg, X)
    for i in range(6):
        for j in range(6):
            assert K[i, j] == pytest.approx(kernel_eval(cfg, X[i], X[j]), abs=1e-12)


def test_kernel_config_validation():
    with pytest.raises(ValueError):
        KernelConfig(signal_variance=0.0)
    with pytest.raises(ValueError):
        KernelConfig(length_scale=(0.1, -0.2))
    with pytest.raises(ValueError):
        KernelConfig(noise_variance=-1e-9)
    with pytest.raises(ValueError):
        KernelConfig(jitter=0.0)


def test_single_point_interpolation():
    cfg = KernelConfig(noise_variance=0.0)
    model = fit(cfg, prior_mean=2.0, xs=[[0.5]], ys=[2.0])
    post = model.predict([0.5])
    assert post.mean == pytest.approx(2.0, abs=1e-8)
    assert post.variance <= 10 * cfg.jitter


def test_prior_recovery_far_from_data():
    cfg = KernelConfig(length_scale=0.05)
    model = fit(cfg, prior_mean=3.0, xs=[[0.0]], ys=[7.0])
    post = model.predict([1.0])  # 20 length scales away
    assert post.mean == pytest.approx(3.0, abs=1e-6)
    assert post.variance == pytest.approx(
        cfg.signal_variance + cfg.noise_variance, rel=1e-6
    )


def test_two_point_closed_form_oracle():
    # mean at 0.5 for data {(0, 0), (1, 1)} via an explicit 2x2 solve
    cfg = KernelConfig(signal_variance=1.0, length_scale=1.0, noise_variance=0.0)
    prior = 0.5
    model = fit(cfg, prior, [[0.0], [1.0]], [0.0, 1.0])
    post = model.predict([0.5])

    scale = np.std([0.0, 1.0])
    t = (np.array([0.0, 1.0]) - prior) / scale
    k01 = math.exp(-0.5)
    K = np.array([[1.0, k01], [k01, 1.0]]) + cfg.jitter * np.eye(2)
    k_star = np.array([math.exp(-0.5 * 0.25), math.exp(-0.5 * 0.25)])
    expected_mean = prior + scale * float(k_star @ np.linalg.solve(K, t))
    assert post.mean == pytest.approx(expected_mean, abs=1e-10)


def test_predict_matches_naive_oracle_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(40):
        d = rng.integers(1, 4)
        n = rng.integers(2, 30)
        X = rng.uniform(size=(n, d))
        y = rng.normal(size=n) * rng.uniform(0.5, 30.0)
        cfg = KernelConfig(
            signal_variance=float(rng.uniform(0.5, 2.0)),
            length_scale=float(rng.uniform(0.1, 0.6)),
            noise_variance=float(rng.uniform(0.0, 0.01)),
        )
        prior = float(np.mean(y))
        model = fit(cfg, prior, X, y)
        for _ in range(3):
            x_star = rng.uniform(size=d)
            post = model.predict(x_star)
            mean, var = naive_predict(cfg, prior, X, y, x_star)
            assert post.mean == pytest.approx(mean, abs=1e-8)
            assert post.variance == pytest.approx(var, abs=1e-8)


def test_interpolates_training_points_with_zero_noise():
    rng = np.random.default_rng(3)
    X = rng.uniform(size=(12, 2))
    y = rng.normal(size=12)
    model = fit_centered(KernelConfig(noise_variance=0.0), X, y)
    for xi, yi in zip(X, y):
        assert model.predict(xi).mean == pytest.approx(yi, abs=1e-6)


def test_permutation_invariance():
    rng = np.random.default_rng(11)
    X = rng.uniform(size=(15, 3))
    y = rng.normal(size=15)
    cfg = KernelConfig()
    model = fit_centered(cfg, X, y)
    perm = rng.permutation(15)
    shuffled = fit_centered(cfg, X[perm], y[perm])
    for _ in range(5):
        x_star = rng.uniform(size=3)
        a = model.predict(x_star)
        b = shuffled.predict(x_star)
        assert a.mean == pytest.approx(b.mean, abs=1e-8)
        assert a.variance == pytest.approx(b.variance, abs=1e-8)


def test_variance_bounds_on_lattice():
    from hypertune.space import default_space, lattice_arrays

    space = default_space()
    _, Z = lattice_arrays(space)
    rng = np.random.default_rng(5)
    X = rng.uniform(size=(20, 3))
    y = rng.normal(size=20) * 11.0
    model = fit_centered(KernelConfig(), X, y)
    _, variances = model.predict_batch(Z)
    assert np.all(variances >= 0.0)
    assert np.all(variances <= model.prior_variance + model.y_scale**2 * 1e-6)


def test_duplicate_inputs_are_merged():
    cfg = KernelConfig(noise_variance=0.0)
    model = fit(cfg, 1.5, [[0.2], [0.2], [0.8]], [1.0, 2.0, 1.5])
    assert model.train_x.shape == (2, 1)
    assert model.predict([0.2]).mean == pytest.approx(1.5, abs=1e-6)


def test_factor_reproduces_covariance():
    rng = np.random.default_rng(2)
    X = rng.uniform(size=(10, 2))
    y = rng.normal(size=10)
    cfg = KernelConfig()
    model = fit_centered(cfg, X, y)
    K = kernel_matrix(cfg, model.train_x) + (
        cfg.noise_variance + model.jitter_used
    ) * np.eye(10)
    np.testing.assert_allclose(model.factor @ model.factor.T, K, atol=1e-10)


def test_refit_is_deterministic():
    rng = np.random.default_rng(9)
    X = rng.uniform(size=(8, 2))
    y = rng.normal(size=8)
    a = fit_centered(KernelConfig(), X, y)
    b = fit_centered(KernelConfig(), X, y)
    assert np.array_equal(a.alpha, b.alpha)
    assert np.array_equal(a.factor, b.factor)


def test_ill_conditioned_error_after_escalation():
    # distinct but nearly identical inputs, zero noise, absurdly small jitter
    cfg = KernelConfig(noise_variance=0.0, jitter=1e-300)
    xs = [[0.0], [1e-13], [2e-13], [3e-13], [4e-13], [5e-13]]
    ys = [0.0, 1.0, -1.0, 2.0, -2.0, 3.0]
    with pytest.raises(IllConditionedError):
        fit(cfg, 0.0, xs, ys)


def test_jitter_escalation_recovers_when_possible():
    cfg = KernelConfig(noise_variance=0.0, jitter=1e-18)
    xs = [[0.0], [1e-9], [0.5]]
    model = fit(cfg, 0.0, xs, [1.0, 1.0, 0.0])
    assert model.jitter_used >= cfg.jitter


def test_grid_search_improves_likelihood():
    rng = np.random.default_rng(21)
    X = rng.uniform(size=(25, 2))
    y = np.sin(6.0 * X[:, 0]) + 0.1 * rng.normal(size=25)
    base = fit_centered(KernelConfig(length_scale=0.8), X, y)
    tuned = fit_grid_search(KernelConfig(length_scale=0.8), X, y)
    assert log_marginal_likelihood(tuned) >= log_marginal_likelihood(base)
    assert isinstance(tuned.kernel.length_scale, tuple)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(1, 3),
    st.integers(2, 20),
)
def test_posterior_variance_never_exceeds_prior(seed, d, n):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, d))
    y = rng.normal(size=n) * rng.uniform(0.1, 100.0)
    model = fit_centered(KernelConfig(), X, y)
    x_star = rng.uniform(size=d)
    post = model.predict(x_star)
    assert post.variance >= 0.0
    assert post.variance <= model.prior_variance * (1.0 + 1e-9) + model.jitter_used
