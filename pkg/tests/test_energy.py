from fractions import Fraction

import numpy as np
import pytest
from oracles import energy_by_enumeration, random_config

from eucdesign.configspace import build_configuration, generate
from eucdesign.energy import (
    Kernel,
    SingularKernelError,
    generalized_sidelnikov,
    parse_kernel,
    potential_energy,
    sidelnikov_rhs_exact,
    weighted_sidelnikov,
)


def test_octahedron_polynomial_energy(octahedron):
    k = parse_kernel("poly-u:64,-48,12,-1")
    assert potential_energy(octahedron, k) == pytest.approx(192, abs=1e-9)
    assert potential_energy(octahedron, Kernel.poly_u([4, -1]) ) == pytest.approx(energy_by_enumeration(
        octahedron, lambda x, y: 4 - np.sum((x - y) ** 2)))


def test_two_point_values():
    X = build_configuration(3, [[1, 0, 0], [-1, 0, 0]])
    assert potential_energy(X, Kernel.riesz(1)) == pytest.approx(1.0)
    assert potential_energy(X, Kernel.inner_power(1)) == pytest.approx(-2.0)


@pytest.mark.parametrize("spec", ["riesz:s=1", "riesz:s=2.5", "innerpow:l=3", "poly-u:1,2,0.5", "poly-t:0,1,1"])
def test_energy_matches_enumeration(spec, rng):
    k = parse_kernel(spec)
    for _ in range(5):
        X = random_config(rng)

        def f(x, y):
            r, s = np.linalg.norm(x), np.linalg.norm(y)
            return float(k(r, s, np.clip(x @ y / (r * s), -1, 1)))

        assert potential_energy(X, k) == pytest.approx(energy_by_enumeration(X, f), rel=1e-11)


def test_singular_kernel():
    X = build_configuration(2, [[1, 0], [1, 0], [0, 1]])
    with pytest.raises(SingularKernelError):
        potential_energy(X, Kernel.riesz(1))
    assert potential_energy(X, Kernel.poly_t([1])) == 6


def test_kernel_parsing_and_spec():
    for spec in ["riesz:s=1", "innerpow:l=4", "poly-u:64,-48,12,-1", "poly-t:1,0,2"]:
        k = parse_kernel(spec)
        assert parse_kernel(k.spec()) == k
    for bad in ["riesz", "riesz:t=1", "innerpow:l=1.5", "poly-u:", "poly-u:1,x", "gauss:a=1", "innerpow:l=-1"]:
        with pytest.raises(ValueError):
            parse_kernel(bad)


def test_singular_mask():
    k = Kernel.riesz(1)
    assert k.is_singular(1.0, 1.0, 1.0)
    assert not k.is_singular(1.0, 2.0, 1.0)
    assert not Kernel.poly_u([1]).is_singular(1.0, 1.0, 1.0)


def test_sidelnikov_examples(octahedron):
    lhs, rhs = generalized_sidelnikov(octahedron, 2)
    assert lhs == pytest.approx(12) and rhs == pytest.approx(12)
    X = generate("simplex", 3)
    lhs, rhs = generalized_sidelnikov(X, 4)
    assert lhs >= rhs - 1e-12


def test_sidelnikov_inequality_random():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        X = random_config(rng)
        for l in range(9):
            lhs, rhs = generalized_sidelnikov(X, l)
            scale = float(np.sum(X.weights * X.norms**l)) ** 2
            assert lhs - rhs >= -1e-9 * max(rhs, scale)


def test_equality_on_euclidean_design(strong_fixture):
    for j in range(2):
        for l in range(4):
            if 2 * j + l <= 3:
                lhs, rhs = weighted_sidelnikov(strong_fixture, j, l)
                assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))
    lhs, rhs = weighted_sidelnikov(strong_fixture, 0, 4)
    assert lhs - rhs > 1e-3


def test_rhs_exact():
    val = sidelnikov_rhs_exact(3, [1, 1, 4], [1, 2, Fraction(1, 2)], 2)
    # A_2 = 1/3; sum w |x|^2 = 1 + 2 + 2 = 5; diagonal 1 + 4 + 4 = 9
    assert val == Fraction(25, 3) - 9
