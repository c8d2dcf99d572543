import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptfsense.generators import random_ptf
from ptfsense.learner import (
    RegressionModel,
    best_threshold,
    choose_degree,
    evaluate,
    feature_index,
    feature_map,
    feature_matrix,
    l1_fit,
    l1_objective,
    l1_regression,
    log_inverse_noise_rate,
    noise_budget,
)
from ptfsense.poly import hypercube_points
from ptfsense.simplex import LPError, get_solver, residual, solve_lp, solve_lp_scipy


# ---------------------------------------------------------------- features


def test_feature_map_examples():
    assert feature_map([1, -1, 1], 0).tolist() == [1.0]
    assert feature_map([1, -1], 2).tolist() == [1.0, 1.0, -1.0, -1.0]
    assert len(feature_index(10, 2)) == 56


def test_feature_order_is_canonical():
    assert feature_index(3, 2) == [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3)]
    assert feature_index(2, 2, "hermite") == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert feature_index(4, 3) == feature_index(4, 3)


def test_hermite_features_are_hermite_values():
    x = np.array([[0.5, -1.5]])
    row = feature_matrix(x, 2, "hermite")[0]
    h2 = lambda t: (t * t - 1) / math.sqrt(2)
    np.testing.assert_allclose(row, [1, 0.5, -1.5, h2(0.5), -0.75, h2(-1.5)])


def test_feature_validation():
    with pytest.raises(ValueError):
        feature_index(3, 4)
    with pytest.raises(ValueError):
        feature_index(3, 2, "fourier")


# ---------------------------------------------------------------- LP solver


def random_lp(rng, m, N):
    A = rng.standard_normal((m, N))
    x0 = rng.uniform(-1, 1, N)
    return rng.standard_normal(N), A, A @ x0, -np.ones(N), np.ones(N)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(9, 40))
def test_simplex_matches_highs(seed, m, N):
    c, A, b, lo, hi = random_lp(np.random.default_rng(seed), m, N)
    ours, ref = solve_lp(c, A, b, lo, hi), solve_lp_scipy(c, A, b, lo, hi)
    assert ours.objective == pytest.approx(ref.objective, rel=1e-7, abs=1e-7)
    assert residual(A, b, ours.x) < 1e-8
    assert np.all(ours.x >= lo - 1e-9) and np.all(ours.x <= hi + 1e-9)


def test_simplex_detects_infeasibility():
    A = np.ones((1, 3))
    with pytest.raises(LPError):
        solve_lp(np.ones(3), A, np.array([5.0]), -np.ones(3), np.ones(3))


def test_simplex_handles_redundant_rows():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]])
    args = (np.array([1.0, 0.0, 1.0]), A, np.array([0.5, 1.0]), -np.ones(3), np.ones(3))
    res = solve_lp(*args)
    assert res.objective == pytest.approx(2.0)
    assert res.objective == pytest.approx(solve_lp_scipy(*args).objective)


def test_solver_lookup():
    assert get_solver(None) is solve_lp
    assert get_solver("highs") is solve_lp_scipy
    with pytest.raises(ValueError):
        get_solver("gurobi")


# ---------------------------------------------------------------- regression


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_l1_regression_is_optimal(seed):
    rng = np.random.default_rng(seed)
    X = rng.choice([-1.0, 1.0], size=(150, 5))
    y = rng.choice([-1.0, 1.0], size=150)
    Phi = feature_matrix(X, 2)
    w = l1_regression(Phi, y, "simplex")
    w_ref = l1_regression(Phi, y, "highs")
    assert l1_objective(Phi, y, w) == pytest.approx(l1_objective(Phi, y, w_ref), rel=1e-8, abs=1e-8)
    # a local perturbation never helps
    for _ in range(5):
        assert l1_objective(Phi, y, w + 1e-3 * rng.standard_normal(w.size)) >= l1_objective(Phi, y, w) - 1e-9


def test_objective_beats_the_true_coefficients():
    rng = np.random.default_rng(4)
    p = random_ptf(8, 2, rng)
    X = rng.choice([-1.0, 1.0], size=(800, 8))
    y = np.where(p.evaluate_many(X) >= 0, 1.0, -1.0)
    flip = rng.random(800) < 0.1
    y[flip] = -y[flip]
    model = l1_fit(X, y, 2)
    truth = np.array([p.coefficient(S) for S in feature_index(8, 2)])
    assert model.objective <= l1_objective(feature_matrix(X, 2), y, truth) + 1e-9


def test_realizable_targets_are_fit_exactly():
    X = hypercube_points(5).astype(float)
    y = np.where(X.sum(axis=1) >= 0, 1, -1)
    assert evaluate(l1_fit(X, y, 1), X, y) == 0.0

    rng = np.random.default_rng(0)
    X = rng.choice([-1.0, 1.0], size=(3000, 8))
    y = np.where(X[:, 0] * X[:, 1] + 0.6 * X[:, 2] - 0.3 >= 0, 1, -1)
    assert evaluate(l1_fit(X, y, 2), X, y) == 0.0


def test_constant_labels_give_constant_hypothesis():
    X = np.random.default_rng(1).choice([-1.0, 1.0], size=(200, 4))
    y = np.ones(200)
    model = l1_fit(X, y, 2)
    assert np.all(model.predict(X) == 1)
    assert evaluate(model, X, y) == 0.0


def test_degenerate_inputs_give_median_constant():
    X = np.ones((5, 3))
    y = np.array([1, 1, -1, 1, -1])
    model = l1_fit(X, y, 2)
    assert model.weights == {(): 1.0}
    assert np.all(model.predict(X) == 1)


def test_hermite_basis_fits_gaussian_data():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((1500, 3))
    y = np.where(X[:, 0] ** 2 - 1.0 >= 0, 1, -1)
    model = l1_fit(X, y, 2, basis="hermite")
    Xt = rng.standard_normal((2000, 3))
    assert evaluate(model, Xt, np.where(Xt[:, 0] ** 2 - 1.0 >= 0, 1, -1)) < 0.03


def test_fit_validates_labels():
    with pytest.raises(ValueError):
        l1_fit(np.ones((3, 2)), np.array([0, 1, 1]), 1)
    with pytest.raises(ValueError):
        l1_fit(np.ones((3, 2)), np.array([1, 1]), 1)


# ---------------------------------------------------------------- threshold, evaluation


def test_best_threshold_minimizes_error():
    scores = np.array([-2.0, -1.0, 0.5, 1.0, 3.0])
    y = np.array([-1, -1, 1, 1, 1])
    t, err = best_threshold(scores, y)
    assert err == 0.0 and -1.0 < t < 0.5


def test_best_threshold_prefers_small_magnitude_on_ties():
    scores = np.array([-3.0, 3.0])
    y = np.array([1, 1])
    t, err = best_threshold(scores, y)
    assert err == 0.0 and t == -4.0
    t, _ = best_threshold(np.array([-1.0, 0.0, 1.0]), np.array([-1, 1, -1]))
    assert abs(t) == 0.5


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30), st.data())
def test_best_threshold_matches_brute_force(scores, data):
    y = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(scores), max_size=len(scores))))
    s = np.array(scores)
    t, err = best_threshold(s, y)
    assert err == pytest.approx(np.mean(np.where(s - t >= 0, 1, -1) != y))
    # every achievable labelling predicts +1 exactly on {s >= v}
    cuts = list(np.unique(s)) + [np.inf]
    best = min(np.mean(np.where(s >= v, 1, -1) != y) for v in cuts)
    assert err == pytest.approx(best)


def test_evaluate_examples():
    X = hypercube_points(4).astype(float)
    y = np.where(X[:, 0] >= 0, 1, -1)
    perfect = RegressionModel(4, 1, "multilinear", {(1,): 1.0}, 0.0)
    assert evaluate(perfect, X, y) == 0.0
    const = RegressionModel(4, 0, "multilinear", {(): 1.0}, 0.0)
    assert evaluate(const, X, y) == 0.5
    rng = np.random.default_rng(0)
    Xs = rng.choice([-1.0, 1.0], size=(1000, 4))
    ys = np.where(Xs[:, 0] >= 0, 1, -1)
    flip = rng.permutation(1000)[:100]
    ys[flip] = -ys[flip]
    assert evaluate(perfect, Xs, ys) == 0.1
    with pytest.raises(ValueError):
        evaluate(perfect, Xs[:0], ys[:0])


# ---------------------------------------------------------------- degree choice


def test_choose_degree_values():
    assert choose_degree(0.2, "hypercube", 1) == 3344
    assert choose_degree(0.3, "gaussian", 2) == 13277961067


def test_hypercube_rate_meets_budget_exactly():
    for d in (1, 2, 3):
        s = log_inverse_noise_rate(0.2, "hypercube", d)
        assert math.exp(-s / 2**d) == pytest.approx(noise_budget(0.2, "hypercube"))
        # the L2 guarantee 2/(1-e^-2) * NS_gamma equals eps^2 at the budget
        assert 2 / (1 - math.exp(-2)) * math.exp(-s / 2**d) == pytest.approx(0.2**2)


def test_gaussian_rate_meets_budget():
    d = 2
    s = log_inverse_noise_rate(0.3, "gaussian", d)
    bound = d * math.sqrt(s) * math.exp(-s / (2 * d))
    assert bound == pytest.approx(noise_budget(0.3, "gaussian"), rel=1e-9)


def test_choose_degree_validates():
    with pytest.raises(ValueError):
        choose_degree(0.6, "hypercube", 1)
    with pytest.raises(ValueError):
        choose_degree(0.2, "sphere", 1)
    with pytest.raises(ValueError):
        choose_degree(0.2, "hypercube", 0)
    with pytest.raises(ValueError):
        choose_degree(0.01, "hypercube", 8)
