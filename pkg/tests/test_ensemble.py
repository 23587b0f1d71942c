import numpy as np
import pytest

from dcee import (Ensemble, adapt, init_ensemble, mse_bound, predict,
                  predicted_spread_trace, quadratic_reward, stats)
from dcee.ensemble import _optima
from dcee.reward import RewardModel


def identity_model(dim=1):
    """Reward with unit regressor and identity optimum map (test double)."""
    return RewardModel(
        known_basis=lambda y: 0.0,
        unknown_basis=lambda y: np.ones(dim),
        optimum_map=lambda th: np.asarray(th, dtype=float),
        dim=dim,
        y_range=(-1.0, 1.0),
        regressor_bound=float(np.sqrt(dim)),
        optimum_map_batch=lambda ths: np.asarray(ths, dtype=float),
    )


def test_init_respects_bounds():
    rng = np.random.default_rng(0)
    ens = init_ensemble(100, [0.0], [20.0], 0.005, rng)
    assert ens.thetas.shape == (100, 1)
    assert np.all(ens.thetas >= 0.0) and np.all(ens.thetas <= 20.0)


def test_init_degenerate_interval():
    rng = np.random.default_rng(0)
    ens = init_ensemble(1, [3.0], [3.0], 0.1, rng)
    assert ens.thetas[0, 0] == 3.0


def test_init_monte_carlo_mean():
    rng = np.random.default_rng(5)
    ens = init_ensemble(10_000, [0.0], [20.0], 0.1, rng)
    assert abs(ens.thetas.mean() - 10.0) < 0.25


def test_init_rejects_bad_arguments():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        init_ensemble(0, [0.0], [1.0], 0.1, rng)
    with pytest.raises(ValueError):
        init_ensemble(2, [1.0], [0.0], 0.1, rng)
    with pytest.raises(ValueError):
        init_ensemble(2, [], [], 0.1, rng)
    with pytest.raises(ValueError):
        init_ensemble(2, [0.0], [1.0], -0.1, rng)


def test_adapt_single_step_hand_computed():
    # unit regressor, zero estimate, unit residual target, rate 1/2
    model = identity_model()
    ens = Ensemble(thetas=np.zeros((1, 1)), rates=np.array([0.5]))
    out = adapt(ens, [0.0], 1.0, model)
    assert out.thetas[0, 0] == pytest.approx(0.5)
    assert out.step == 1


def test_adapt_fixed_point_at_truth():
    model = quadratic_reward()
    ens = Ensemble(thetas=np.full((5, 1), 1.0), rates=np.full(5, 0.005))
    j = 2.0 * 1.3 - 1.0 * 1.3 ** 2  # noise-free reward at y = 1.3
    out = adapt(ens, [1.3], j, model)
    np.testing.assert_allclose(out.thetas, ens.thetas, atol=1e-15)


def test_adapt_rejects_non_finite_observation():
    model = quadratic_reward()
    ens = Ensemble(thetas=np.ones((2, 1)), rates=np.full(2, 0.1))
    with pytest.raises(ValueError):
        adapt(ens, [1.0], float("nan"), model)


def test_adapt_converges_on_persistently_exciting_sequence():
    # noise-free regression oracle: the update law itself, run to steady state
    model = quadratic_reward()
    rng = np.random.default_rng(2)
    ens = init_ensemble(100, [0.0], [20.0], 0.005, rng)
    theta_true = 1.0
    ys = [1.0, 1.3]
    for k in range(2000):
        y = ys[k % 2]
        j = 2.0 * y - theta_true * y * y
        ens = adapt(ens, [y], j, model)
    assert abs(ens.thetas.mean() - theta_true) < 1e-3


def test_stats_two_point_example():
    model = identity_model()
    ens = Ensemble(thetas=np.array([[0.5], [1.5]]), rates=np.full(2, 0.1))
    s = stats(ens, model)
    assert s.mean[0] == pytest.approx(1.0)
    assert s.r_mean[0] == pytest.approx(1.0)
    assert s.r_var == pytest.approx(0.25)
    assert s.spread.shape == (2, 1, 1)


def test_stats_collapsed_ensemble_has_zero_spread():
    model = identity_model()
    ens = Ensemble(thetas=np.full((7, 1), 4.2), rates=np.full(7, 0.1))
    assert stats(ens, model).r_var == 0.0


def test_stats_uniform_prior_variance():
    model = identity_model()
    rng = np.random.default_rng(9)
    ens = init_ensemble(100, [0.0], [20.0], 0.1, rng)
    s = stats(ens, model)
    assert abs(s.r_var - 400.0 / 12.0) < 0.2 * 400.0 / 12.0


def test_stats_permutation_invariant():
    model = quadratic_reward()
    rng = np.random.default_rng(3)
    ens = init_ensemble(30, [0.5], [20.0], 0.01, rng)
    shuffled = Ensemble(thetas=ens.thetas[::-1].copy(), rates=ens.rates.copy())
    assert stats(ens, model).r_var == pytest.approx(
        stats(shuffled, model).r_var, rel=1e-12)


def test_predict_is_identity_for_collapsed_ensemble():
    model = quadratic_reward()
    ens = Ensemble(thetas=np.full((5, 1), 1.0), rates=np.full(5, 0.005))
    cur = stats(ens, model)
    pred = predict(ens, [1.5], model)
    assert pred.r_mean[0] == cur.r_mean[0]
    assert pred.r_var == cur.r_var == 0.0


def test_predict_zero_regressor_changes_nothing():
    # the quadratic regressor vanishes at y = 0: no information there
    model = quadratic_reward()
    ens = Ensemble(thetas=np.array([[0.5], [2.0]]), rates=np.full(2, 0.1))
    cur = stats(ens, model)
    pred = predict(ens, [0.0], model)
    assert pred.r_var == pytest.approx(cur.r_var, rel=1e-14)
    np.testing.assert_allclose(pred.mean, cur.mean)


def test_predict_informative_point_shrinks_spread():
    model = quadratic_reward()
    rng = np.random.default_rng(4)
    ens = init_ensemble(100, [0.0], [20.0], 0.005, rng)
    at_zero = predict(ens, [0.0], model).r_var
    at_one = predict(ens, [1.0], model).r_var
    assert at_one <= at_zero


def test_variance_decomposition_identity():
    # total squared distance splits exactly into tracking + spread parts
    model = quadratic_reward()
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(300):
        n = int(rng.integers(2, 40))
        ens = Ensemble(thetas=rng.uniform(0.1, 20.0, (n, 1)),
                       rates=np.full(n, 0.01))
        y = rng.uniform(-5.0, 5.0)
        s = stats(ens, model)
        r = _optima(ens.thetas, model)
        lhs = np.mean(np.sum((y - r) ** 2, axis=1))
        rhs = (y - s.r_mean[0]) ** 2 + s.r_var
        worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-12


def test_collapsed_ensemble_stays_collapsed_under_adapt():
    model = quadratic_reward()
    ens = Ensemble(thetas=np.full((6, 1), 7.0), rates=np.full(6, 0.005))
    rng = np.random.default_rng(0)
    for _ in range(50):
        y = rng.uniform(-2.0, 2.0)
        ens = adapt(ens, [y], rng.normal(), model)
        assert np.all(ens.thetas == ens.thetas[0, 0])


def test_adapt_noise_free_is_contraction():
    model = quadratic_reward()
    theta_true = 1.0
    rng = np.random.default_rng(8)
    for _ in range(100):
        theta = rng.uniform(0.0, 20.0)
        rate = rng.uniform(1e-4, 0.05)
        y = rng.uniform(-2.0, 2.0)
        if rate * y ** 4 >= 1.0:
            continue
        ens = Ensemble(thetas=np.array([[theta]]), rates=np.array([rate]))
        j = 2.0 * y - theta_true * y * y
        out = adapt(ens, [y], j, model)
        assert abs(out.thetas[0, 0] - theta_true) <= abs(theta - theta_true) + 1e-15


def test_predicted_spread_trace_matches_direct_formula():
    model = quadratic_reward()
    rng = np.random.default_rng(6)
    ens = init_ensemble(20, [0.5], [10.0], 0.01, rng)
    y = np.array([1.2])
    phi = model.unknown_basis(y)
    dev = ens.thetas - ens.thetas.mean(axis=0)
    expected = float(np.sum((dev @ phi) ** 4))
    assert predicted_spread_trace(ens, y, model) == pytest.approx(expected, rel=1e-12)


def test_mse_bound_values_and_rejection():
    assert mse_bound(0.1, 1.0, 0.0, 0.5) == 0.0
    assert mse_bound(0.1, 1.0, 2.0, 0.5) == pytest.approx(0.04)
    with pytest.raises(ValueError):
        mse_bound(0.1, 1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        mse_bound(0.1, 1.0, 2.0, -0.2)
