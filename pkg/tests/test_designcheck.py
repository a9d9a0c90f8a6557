import numpy as np
import pytest
from conftest import two_octahedra
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import pair_enumeration_strength, q_scipy

from eucdesign.configspace import (
    build_configuration,
    generate,
    random_rotation,
)
from eucdesign.designcheck import (
    harmonic_basis,
    harmonic_moment_check,
    is_euclidean_design,
    is_spherical_design,
    is_strong_design,
    max_strength,
    moment,
    moment_report,
)
from eucdesign.harmonics import harm_dim


def test_moment_report_matches_enumeration(rng):
    X = build_configuration(3, rng.normal(size=(7, 3)), rng.uniform(0.5, 2, 7))
    rep = moment_report(X, 3, 4)
    for i in range(4):
        for j in range(5):
            ref = sum(
                X.weights[a] * X.weights[b] * (X.norms[a] * X.norms[b]) ** i
                * q_scipy(3, j, float(np.clip(X.unit_points[a] @ X.unit_points[b], -1, 1)))
                for a in range(7) for b in range(7)
            )
            assert rep.values[i, j] == pytest.approx(ref, rel=1e-11, abs=1e-11)
    assert moment(X, 2, 3) == pytest.approx(rep.values[2, 3])


def test_polygon_trig_sums():
    # sum_{x,y} Q_j(x.y) = 2 |sum_k e^{i j theta_k}|^2 for j >= 1 on the circle
    for n in range(3, 13):
        X = generate("polygon", 2, n=n)
        rep = moment_report(X, 0, n + 1)
        theta = 2 * np.pi * np.arange(n) / n
        for j in range(1, n + 2):
            ref = 2 * abs(np.exp(1j * j * theta).sum()) ** 2
            assert rep.values[0, j] == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize(
    "kind,d,n,expected",
    [("cross_polytope", 3, None, 3), ("icosahedron", 3, None, 5), ("simplex", 3, None, 2), ("cube", 3, None, 3),
     ("cross_polytope", 4, None, 3)],
)
def test_catalog_strengths(kind, d, n, expected):
    X = generate(kind, d, n=n)
    assert max_strength(X, "spherical") == expected
    assert pair_enumeration_strength(X) == expected


@pytest.mark.parametrize("n", range(3, 13))
def test_polygon_strength(n):
    X = generate("polygon", 2, n=n)
    assert max_strength(X, "spherical", t_cap=14) == n - 1
    assert pair_enumeration_strength(X, t_cap=14) == n - 1


def test_strong_fixture(strong_fixture):
    X = strong_fixture
    assert is_strong_design(X, 3) and is_euclidean_design(X, 3)
    assert is_strong_design(X, 3).max_residual <= 1e-9
    assert not is_strong_design(X, 4) and not is_euclidean_design(X, 4)
    assert max_strength(X, "strong") == 3
    with pytest.raises(ValueError):
        is_spherical_design(X, 2)


def test_euclidean_but_not_strong():
    # sum w x = 0 but sum w x' = (1, 0): a Euclidean 1-design that is not strong
    X = build_configuration(2, [[1, 0], [-2, 0]], [2, 1])
    assert is_euclidean_design(X, 1)
    assert not is_strong_design(X, 1)
    assert bool(harmonic_moment_check(X, 1, strong=True)) is False


@pytest.mark.parametrize("d,l", [(2, 0), (2, 3), (3, 1), (3, 2), (3, 4)])
def test_harmonic_basis_is_harmonic(d, l, rng):
    basis = harmonic_basis(d, l)
    assert len(basis) == harm_dim(d, l)
    p = rng.normal(size=(5, d))
    h = 1e-3
    for phi in basis:
        lap = sum(
            (phi(p + h * e) - 2 * phi(p) + phi(p - h * e)) / h**2 for e in np.eye(d)
        )
        scale = np.max(np.abs(phi(p))) + 1
        assert np.max(np.abs(lap)) <= 1e-4 * scale * max(1, l) ** 2
        # homogeneity of degree l
        np.testing.assert_allclose(phi(2 * p), 2**l * phi(p), rtol=1e-10, atol=1e-10)


def test_harmonic_check_agrees(strong_fixture):
    ico = generate("icosahedron", 3)
    for t in range(1, 7):
        assert bool(harmonic_moment_check(ico, t)) == bool(is_euclidean_design(ico, t))
    for t in range(1, 5):
        assert bool(harmonic_moment_check(strong_fixture, t, strong=True)) == bool(is_strong_design(strong_fixture, t))
        assert bool(harmonic_moment_check(strong_fixture, t)) == bool(is_euclidean_design(strong_fixture, t))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), w1=st.floats(0.1, 10), w2=st.floats(0.1, 10))
def test_strength_rotation_and_weight_invariant(seed, w1, w2):
    X = two_octahedra(w1, w2, seed=seed % 1000)
    assert max_strength(X, "strong", t_cap=5) == 3
    R = random_rotation(3, np.random.default_rng(seed))
    assert max_strength(X.transformed(R), "euclidean", t_cap=5) == 3


def test_errors(octahedron):
    with pytest.raises(ValueError):
        max_strength(octahedron, "cubature")
    with pytest.raises(ValueError):
        is_euclidean_design(octahedron, -1)
    with pytest.raises(ValueError):
        harmonic_basis(4, 2)
