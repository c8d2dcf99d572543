import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import polys, tables
from ptfsense.boolean import (
    PtfBoolean,
    as_bound_closed,
    as_bound_recursive,
    central_binomial_mass,
    exact_as,
    exact_influence,
    exact_influences,
    exact_ns,
    influence_via_derivative,
    majority_as,
    middle_layers_symmetric,
    ns_pair_enumeration,
    one_flip_lower_bound,
    pairwise_cross_term,
)
from ptfsense.generators import random_ptf
from ptfsense.poly import MultilinearPoly, TruthTable


def dictator(n):
    return TruthTable.from_function(n, lambda x: x[0])


def parity(n):
    return TruthTable.from_function(n, lambda x: int(np.prod(x)))


MAJ3 = TruthTable.from_function(3, lambda x: oracles.sgn(sum(x)))


def test_influence_examples():
    assert exact_influence(dictator(3), 1) == 1.0
    assert exact_influence(dictator(3), 2) == 0.0
    assert exact_influence(MAJ3, 1) == 0.5


def test_average_sensitivity_examples():
    for n in range(1, 9):
        assert exact_as(parity(n)) == n
    assert exact_as(MAJ3) == 1.5
    assert exact_as(TruthTable(4, np.ones(16))) == 0.0


def test_noise_sensitivity_examples():
    for eps in (0.0, 0.1, 0.37):
        assert exact_ns(dictator(4), eps) == pytest.approx(eps, abs=1e-15)
        assert exact_ns(parity(2), eps) == pytest.approx(2 * eps * (1 - eps), abs=1e-15)
    assert exact_ns(MAJ3, 0.0) == 0.0


def test_noise_rate_is_validated():
    with pytest.raises(ValueError):
        exact_ns(MAJ3, -0.1)
    with pytest.raises(ValueError):
        exact_ns(MAJ3, 1.5)


@given(tables(max_n=6))
def test_influences_match_flip_count(t):
    ref = [oracles.influence(t, t.n, i) for i in range(1, t.n + 1)]
    np.testing.assert_allclose(exact_influences(t), ref, atol=1e-15)
    assert exact_as(t) == pytest.approx(sum(ref), abs=1e-12)


@given(tables(max_n=4), st.sampled_from([0.05, 0.1, 0.3, 0.5]))
def test_spectral_ns_matches_pair_sum(t, eps):
    ref = oracles.noise_sensitivity(t, t.n, eps)
    assert exact_ns(t, eps) == pytest.approx(ref, abs=1e-12)
    assert ns_pair_enumeration(t, eps) == pytest.approx(ref, abs=1e-12)


@given(tables(max_n=7))
def test_ns_monotone_on_half_interval(t):
    grid = np.linspace(0, 0.5, 11)
    vals = [exact_ns(t, e) for e in grid]
    assert vals[0] == 0.0
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


@given(tables(min_n=2, max_n=7))
def test_one_flip_lower_bound(t):
    r = one_flip_lower_bound(t)
    assert r["ns"] >= r["lower"] - 1e-12


def test_influence_via_derivative_examples():
    assert influence_via_derivative(PtfBoolean(MultilinearPoly.variable(3, 1)), 1) == 1.0
    maj = PtfBoolean(MultilinearPoly.from_terms(3, {(1,): 1.0, (2,): 1.0, (3,): 1.0}))
    assert influence_via_derivative(maj, 1) == 0.5
    f = PtfBoolean(MultilinearPoly.from_terms(3, {(1, 2): 1.0, (3,): 0.5}))
    assert influence_via_derivative(f, 3) == exact_influence(f, 3)


@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(1, 3))
def test_influence_identity_for_random_ptfs(seed, n, d):
    f = PtfBoolean(random_ptf(n, min(d, n), np.random.default_rng(seed)))
    for i in range(1, n + 1):
        assert abs(influence_via_derivative(f, i) - exact_influence(f, i)) < 1e-12


def test_bound_examples():
    assert as_bound_recursive(5, 0) == 0.0
    assert as_bound_recursive(16, 1) == 4.0
    assert as_bound_closed(16, 2) == pytest.approx(16.0)
    assert as_bound_closed(7, 0) == 0.0


@given(st.integers(1, 200), st.integers(0, 6))
def test_recursive_bound_below_closed(n, d):
    assert as_bound_recursive(n, d) <= as_bound_closed(n, d) + 1e-9


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9])
def test_majority_sensitivity_formula(n):
    maj = TruthTable.from_function(n, lambda x: oracles.sgn(sum(x)))
    assert exact_as(maj) == pytest.approx(majority_as(n), abs=1e-12)
    assert majority_as(n) <= as_bound_recursive(n, 1) + 1e-12


def test_central_binomial_mass_is_distinct_from_majority():
    # both quantities are reported; majority AS is n times the mass at n-1
    assert majority_as(5) == pytest.approx(5 * central_binomial_mass(4))


def test_middle_layers_examples():
    for n in (3, 5, 7):
        ml = middle_layers_symmetric(n, 1)
        maj = TruthTable.from_function(n, lambda x: oracles.sgn(sum(x)))
        assert ml.table == maj or ml.table == TruthTable(n, -maj.values)
    assert exact_as(middle_layers_symmetric(3, 1).table) == 1.5
    ratio = exact_as(middle_layers_symmetric(10, 2).table) / (2 * math.sqrt(10))
    assert 0.5 <= ratio <= 1.5


@pytest.mark.parametrize("n,d", [(8, 2), (9, 3), (10, 2)])
def test_middle_layers_polynomial_agrees_with_table(n, d):
    ml = middle_layers_symmetric(n, d)
    assert PtfBoolean(ml.polynomial).table == ml.table
    assert len(ml.boundaries) == d
    assert ml.polynomial.degree == d


def test_cross_term_examples():
    xj = MultilinearPoly.variable(4, 2)
    xi = MultilinearPoly.variable(4, 1)
    r = pairwise_cross_term(xj, xi, 1, 2)
    assert r["value"] == 1.0 and r["bound"] == 1.0
    c = MultilinearPoly.constant(4, 0.0)
    r = pairwise_cross_term(c, c, 1, 2)
    assert r["value"] == 0.0 and r["bound"] == 0.0
    with pytest.raises(ValueError):
        pairwise_cross_term(xi, xi, 1, 2)


@given(st.integers(0, 2**32 - 1))
def test_cross_term_inequality_random_pairs(seed):
    rng = np.random.default_rng(seed)
    n, i, j = 8, 3, 6
    f = random_ptf(n, 2, rng)
    g = random_ptf(n, 2, rng)
    # remove the forbidden variable from each by restricting it away
    f = MultilinearPoly(n, {m & ~(1 << (i - 1)): c for m, c in f.coeffs.items()})
    g = MultilinearPoly(n, {m & ~(1 << (j - 1)): c for m, c in g.coeffs.items()})
    r = pairwise_cross_term(PtfBoolean(f).table, PtfBoolean(g).table, i, j)
    assert r["value"] <= r["bound"] + 1e-12


@given(polys(min_n=2, max_n=10, max_d=2))
def test_degree_two_sensitivity_below_closed_bound(p):
    f = PtfBoolean(p)
    assert exact_as(f) <= as_bound_closed(p.n, max(p.degree, 1)) + 1e-12
