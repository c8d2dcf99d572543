import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import oracles
from ptfsense.gaussian import (
    anticoncentration_probe,
    correlated_pair,
    cross_correlation,
    cross_correlation_exact,
    estimate_gas,
    estimate_gi,
    estimate_gns,
    fit_loglog_slope,
    fit_semilog_slope,
    invariance_distance,
    perturbation_norm,
    perturbation_norm_exact,
    sheppard,
    tail_probe,
)
from ptfsense.generators import random_expansion
from ptfsense.hermite import HermiteExpansion
from ptfsense.poly import MultilinearPoly
from ptfsense.rng import stream, threads

H1 = HermiteExpansion(3, {(1,): 1.0})


def e(i, n, k=1):
    S = [0] * n
    S[i - 1] = k
    return tuple(S)


# ---------------------------------------------------------------- influence


def test_gi_of_a_dictator():
    est = estimate_gi(H1, 1, 200_000, 0)
    assert est.within(1.0)


def test_gi_of_an_absent_variable_is_exactly_zero():
    est = estimate_gi(H1, 2, 1000, 0)
    assert est.mean == 0.0 and est.stderr == 0.0


def test_gi_of_two_variable_halfspace_matches_quadrature():
    p = HermiteExpansion(2, {(1, 0): 1.0, (0, 1): 1.0})
    ref = oracles.gaussian_influence_two_halfspace()
    assert ref == pytest.approx(2 / 3, abs=1e-9)
    assert estimate_gi(p, 1, 400_000, 5).within(ref)


def test_gas_examples():
    assert estimate_gas(H1, 100_000, 1).within(1.0)
    p = HermiteExpansion(6, {e(2, 6): 1.0, e(5, 6, 2): 0.5, (0, 1, 0, 0, 1): 0.3})
    est = estimate_gas(p, 50_000, 2)
    assert est.mean <= 2 + 3 * est.stderr


def test_gas_of_symmetric_halfspace_matches_quadrature():
    n = 100
    p = HermiteExpansion(n, {e(i, n): 1 / math.sqrt(n) for i in range(1, n + 1)})
    ref = n * oracles.gaussian_influence_symmetric_halfspace(n)
    assert ref == pytest.approx(n * 2 * math.acos(1 - 1 / n) / math.pi, rel=1e-9)
    assert estimate_gas(p, 20_000, 0).within(ref)


# ---------------------------------------------------------------- noise sensitivity


def test_correlated_pair_has_the_right_correlation():
    x, y = correlated_pair(stream(0, "t"), 400_000, 2, 0.3)
    assert np.corrcoef(x[:, 0], y[:, 0])[0, 1] == pytest.approx(0.7, abs=0.005)
    assert y.std() == pytest.approx(1.0, abs=0.005)


def test_gns_examples():
    assert estimate_gns(H1, 0.0, 1000, 0).mean == 0.0
    assert estimate_gns(H1, 0.5, 200_000, 1).within(1 / 3)
    assert estimate_gns(H1, 1.0, 200_000, 2).within(0.5)


@pytest.mark.parametrize("eps", [0.01, 0.1, 0.5])
def test_gns_of_linear_forms_matches_sheppard(eps):
    p = HermiteExpansion(2, {(1,): 0.6, (0, 1): -0.8})
    assert estimate_gns(p, eps, 200_000, 3).within(sheppard(1 - eps))


def test_gns_increases_with_noise():
    p = random_expansion(4, 2, np.random.default_rng(0))
    ests = [estimate_gns(p, eps, 100_000, 4) for eps in (0.01, 0.05, 0.2, 0.5)]
    for a, b in zip(ests, ests[1:]):
        assert b.mean + 3 * b.stderr >= a.mean - 3 * a.stderr


def test_sheppard_endpoints():
    assert sheppard(1.0) == 0.0
    assert sheppard(0.0) == 0.5
    assert sheppard(-1.0) == 1.0


# ---------------------------------------------------------------- perturbation norm


def test_perturbation_norm_examples():
    p = HermiteExpansion(1, {(1,): 1.0})
    for eps in (0.01, 0.2, 0.7):
        assert perturbation_norm_exact(p, eps) == pytest.approx(math.sqrt(2 * eps))
    assert perturbation_norm_exact(p, 0.0) == 0.0
    q = HermiteExpansion(1, {(2,): 1.0})
    est, exact = perturbation_norm(q, 0.1, 200_000, 0)
    assert exact == pytest.approx(math.sqrt(0.38))
    assert est.within(exact)


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_perturbation_norm_monte_carlo_agrees(seed, d):
    p = random_expansion(3, d, np.random.default_rng(seed))
    est, exact = perturbation_norm(p, 0.2, 100_000, seed)
    assert est.within(exact, k=4.0)


def test_cross_correlation_exact_values():
    assert cross_correlation_exact((2, 1), (2, 1), 0.1) == pytest.approx(0.9**3)
    assert cross_correlation_exact((1,), (0, 1), 0.1) == 0.0
    est = cross_correlation((2, 1), (2, 1), 0.1, 200_000, 0)
    assert est.within(0.9**3)
    assert cross_correlation((2,), (1, 1), 0.1, 200_000, 1).within(0.0)


# ---------------------------------------------------------------- probes


def test_tail_probe_examples():
    p = HermiteExpansion(1, {(1,): 1.0})
    zero, two = tail_probe(p, [0.0, 2.0], 400_000, 0)
    assert zero.estimate.mean == 1.0
    assert two.estimate.within(2 * stats.norm.sf(2))


def test_tail_probe_requires_unit_norm():
    with pytest.raises(ValueError):
        tail_probe(HermiteExpansion(1, {(1,): 2.0}), [1.0], 1000, 0)


def test_tail_decay_of_a_product_is_exponential_in_t():
    p = HermiteExpansion(2, {(1, 1): 1.0})
    ts = [1, 2, 3, 4, 5, 6]
    pts = tail_probe(p, ts, 1_000_000, 2)
    slope = fit_semilog_slope(ts, [q.estimate.mean for q in pts])
    assert 0.7 <= -slope <= 1.3


def test_anticoncentration_examples():
    p = HermiteExpansion(1, {(1,): 1.0})
    (pt,) = anticoncentration_probe(p, [0.1], 400_000, 0)
    assert pt.gaussian.within(2 * stats.norm.cdf(0.1) - 1)
    # on the cube |x1| = 1, so any eps >= 1 catches everything
    (pt,) = anticoncentration_probe(p, [1.0], 1000, 0)
    assert pt.hypercube.mean == 1.0


def test_small_ball_exponent_of_a_square():
    # x1^2 normalized: Pr[|p| <= eps] ~ eps^(1/2)
    p = HermiteExpansion(1, {(2,): math.sqrt(2 / 3), (): 1 / math.sqrt(3)})
    grid = [1e-3, 1e-2, 1e-1]
    pts = anticoncentration_probe(p, grid, 400_000, 1)
    assert 0.35 <= fit_loglog_slope(grid, [q.gaussian.mean for q in pts]) <= 0.65


def test_small_ball_slope_of_a_product():
    # Pr[|x1 x2| <= eps] ~ (2/pi) eps log(1/eps): slope between 1/2 and 1
    p = HermiteExpansion(2, {(1, 1): 1.0})
    grid = [1e-3, 1e-2, 1e-1]
    pts = anticoncentration_probe(p, grid, 400_000, 1)
    assert 0.5 < fit_loglog_slope(grid, [q.gaussian.mean for q in pts]) < 1.0


# ---------------------------------------------------------------- invariance


def test_invariance_of_a_wide_linear_form():
    n = 400
    p = MultilinearPoly(n, {1 << j: 1 / math.sqrt(n) for j in range(n)})
    ref = oracles.binomial_normal_kolmogorov(n)
    assert ref <= 1 / math.sqrt(n)
    samples = 100_000
    margin = 1.95 * math.sqrt(2 / samples)  # two-sample KS, alpha = 0.001
    r = invariance_distance(p, samples, 0)
    assert r.distance <= 1 / math.sqrt(n) + margin
    assert abs(r.distance - ref) <= margin
    assert r.max_influence == pytest.approx(1 / n)


def test_invariance_of_a_dictator():
    ref = stats.norm.cdf(1.0) - 0.5  # gap just below t = 1
    r = invariance_distance(MultilinearPoly.variable(3, 1), 100_000, 0)
    assert abs(r.distance - ref) <= 1.95 * math.sqrt(2 / 100_000)


def test_invariance_of_a_constant():
    assert invariance_distance(MultilinearPoly.constant(3, 2.0), 1000, 0).distance == 0.0


# ---------------------------------------------------------------- reproducibility


def test_estimates_do_not_depend_on_thread_count():
    p = random_expansion(5, 2, np.random.default_rng(1))
    with threads(1):
        a = estimate_gns(p, 0.1, 300_000, 9)
        b = estimate_gas(p, 100_000, 9)
    with threads(4):
        assert estimate_gns(p, 0.1, 300_000, 9) == a
        assert estimate_gas(p, 100_000, 9) == b


def test_seed_changes_the_estimate():
    assert estimate_gns(H1, 0.1, 10_000, 1).mean != estimate_gns(H1, 0.1, 10_000, 2).mean
