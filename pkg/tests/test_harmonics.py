from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import laplacian_nullity
from scipy import special

from eucdesign.harmonics import (
    double_factorial,
    gegenbauer_eval,
    gegenbauer_table,
    gegenbauer_to_power,
    gegenbauer_to_power_exact,
    harm_dim,
    monomial_expansion,
    power_to_gegenbauer_exact,
    sidelnikov_constant,
)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("l", range(9))
def test_harm_dim_matches_laplacian_kernel(d, l):
    assert harm_dim(d, l) == laplacian_nullity(d, l)


def test_harm_dim_small_values():
    assert [harm_dim(3, l) for l in range(5)] == [1, 3, 5, 7, 9]
    assert [harm_dim(2, l) for l in range(4)] == [1, 2, 2, 2]
    with pytest.raises(ValueError):
        harm_dim(1, 2)


def test_double_factorial():
    assert [double_factorial(n) for n in range(-1, 8)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]


@pytest.mark.parametrize("d", range(2, 9))
def test_normalization_at_one(d):
    q = gegenbauer_table(d, 16).evaluate_all(1.0)
    for j in range(17):
        assert abs(q[j] - harm_dim(d, j)) <= 1e-12 * harm_dim(d, j)


def test_known_values():
    t3 = gegenbauer_table(3, 4)
    assert gegenbauer_eval(t3, 2, 0.0) == pytest.approx(-2.5, abs=1e-15)
    assert gegenbauer_eval(t3, 2, 1.0) == pytest.approx(5.0, abs=1e-15)
    theta = np.linspace(0, np.pi, 7)
    t2 = gegenbauer_table(2, 6)
    for j in range(1, 7):
        np.testing.assert_allclose(t2(j, np.cos(theta)), 2 * np.cos(j * theta), atol=1e-13)


@pytest.mark.parametrize("d", [3, 4, 5, 7])
def test_matches_scipy_gegenbauer(d):
    lam = (d - 2) / 2
    t = np.linspace(-1, 1, 41)
    table = gegenbauer_table(d, 10)
    for j in range(11):
        ref = special.eval_gegenbauer(j, lam, t) * (j + lam) / lam
        np.testing.assert_allclose(table(j, t), ref, rtol=1e-11, atol=1e-11)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_orthogonality_under_jacobi_quadrature(d):
    # Gauss-Jacobi nodes for the weight (1 - t^2)^((d-3)/2), exact up to degree 2n-1
    a = (d - 3) / 2
    nodes, w = special.roots_jacobi(30, a, a)
    q = gegenbauer_table(d, 12).evaluate_all(nodes)
    gram = (q * w) @ q.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) <= 1e-10 * np.max(np.diag(gram))
    # the normalization makes <Q_j, Q_j> = Q_j(1) <1, 1>
    dims = np.array([harm_dim(d, j) for j in range(13)], dtype=float)
    np.testing.assert_allclose(np.diag(gram) / gram[0, 0], dims, rtol=1e-10)


def test_domain_and_range_errors():
    table = gegenbauer_table(3, 3)
    with pytest.raises(ValueError):
        table(2, 1.5)
    with pytest.raises(ValueError):
        table(4, 0.0)
    with pytest.raises(ValueError):
        gegenbauer_table(3, -1)


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 8), j=st.integers(0, 14), t=st.floats(-1, 1))
def test_bounded_by_value_at_one(d, j, t):
    val = gegenbauer_table(d, 14)(j, t)
    assert abs(val) <= harm_dim(d, j) * (1 + 1e-12)


def test_sidelnikov_constants():
    assert sidelnikov_constant(3, 2) == Fraction(1, 3)
    assert sidelnikov_constant(3, 4) == Fraction(1, 5)
    assert sidelnikov_constant(5, 3) == 0
    assert sidelnikov_constant(4, 0) == 1


def test_expansion_example():
    assert monomial_expansion(3, 2).coefficients == (Fraction(2, 15), Fraction(0), Fraction(1, 3))
    # t^3 = (2/35) Q_3 + (1/5) Q_1 in d = 3, checked by hand with Q_3 = (35 t^3 - 21 t) / 2
    assert monomial_expansion(3, 3).coefficients == (Fraction(2, 35), 0, Fraction(1, 5), 0)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_expansion_against_linear_system(d):
    # oracle: express t^l in the Q basis by solving the triangular power-basis system
    for l in range(11):
        mat = np.array([gegenbauer_to_power(d, [0] * j + [1] + [0] * (l - j)) for j in range(l + 1)]).T
        target = np.zeros(l + 1)
        target[l] = 1.0
        g = np.linalg.solve(mat, target)
        coeffs = monomial_expansion(d, l).coefficients
        np.testing.assert_allclose([float(c) for c in coeffs], g[::-1], atol=1e-12)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_expansion_reconstructs_monomial(d):
    t = np.linspace(-1, 1, 101)
    for l in range(11):
        exp = monomial_expansion(d, l)
        assert np.max(np.abs(t**l - exp.evaluate(t))) <= 1e-10
        assert exp.coefficients[l] == sidelnikov_constant(d, l)


def test_power_roundtrip_exact():
    g = [Fraction(3), Fraction(-1, 2), Fraction(0), Fraction(5, 7)]
    for d in (2, 3, 5):
        assert power_to_gegenbauer_exact(d, gegenbauer_to_power_exact(d, g)) == g
    # (1 + 3t)^2 in d = 3
    assert power_to_gegenbauer_exact(3, [1, 6, 9]) == [4, 2, Fraction(6, 5)]
