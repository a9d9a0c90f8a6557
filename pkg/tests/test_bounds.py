import json
import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from conftest import two_octahedra
from oracles import random_feasible_code_certs

from eucdesign.bounds import (
    BoundError,
    Certificate,
    CertificateInfeasible,
    code_bound_check,
    code_bound_optimize,
    design_bound_check,
    design_bound_check_configuration,
    design_certificate_from_t_poly,
    energy_lower_bound,
    energy_objective,
    energy_objective_exact,
    fisher_design_certificate,
    fisher_per_sphere,
    fisher_spherical,
    fisher_strong,
    index_set,
    sidelnikov_certificate,
    z_matrix,
)
from eucdesign.configspace import build_configuration, generate
from eucdesign.designcheck import max_strength
from eucdesign.energy import Kernel, potential_energy, sidelnikov_rhs_exact
from eucdesign.harmonics import power_to_gegenbauer_exact

PENTAGON_A = 2 * math.sin(math.pi / 5)


@pytest.fixture(scope="module")
def circle_report():
    return code_bound_optimize([1], PENTAGON_A, 2, jmax=16, grid_n=1001)


# ---------------------------------------------------------------- certificates


def test_index_set():
    assert set(index_set(2)) == {(0, 0), (1, 0), (2, 0), (1, 1), (2, 2)}
    assert set(index_set(0)) == {(0, 0)}
    assert (3, 1) in index_set(3) and (2, 1) not in index_set(3)
    I = index_set(6)
    for i in range(7):
        assert (i, 0) in I
        for j in range(1, 7):
            assert ((i, j) in I) == (i >= j and (i - j) % 2 == 0)


def test_certificate_serialization_roundtrip():
    exact = sidelnikov_certificate(4, 3)
    back = Certificate.loads(exact.dumps())
    assert back.exact and back.d == 4 and np.array_equal(back.coeffs, exact.coeffs)
    flt = Certificate(3, np.array([[0.25, 1 / 3], [0.0, 2.0]]), "code")
    back = Certificate.loads(flt.dumps())
    assert back.coeffs.tobytes() == flt.coeffs.tobytes()
    assert json.loads(fisher_design_certificate(3, 2).dumps())["t"] == 2
    with pytest.raises(ValueError):
        Certificate.loads("{oops")
    with pytest.raises(ValueError):
        Certificate(3, np.zeros((2, 2)), "kissing")


def test_sign_patterns():
    c = Certificate(3, np.array([[-1.0, 2.0], [1.0, -0.5]]), "energy")
    assert c.sign_violations() == [(1, 1)]
    assert Certificate(3, c.coeffs, "code").sign_violations() == [(0, 0), (1, 1)]
    d = Certificate(3, np.array([[1.0, 0.5], [0.0, 2.0]]), "design", t=1)
    assert d.sign_violations() == [(0, 1)]


def test_sidelnikov_certificate_values():
    c = sidelnikov_certificate(3, 2)
    assert c.coeffs[2, 0] == Fraction(1, 3) and c.coeffs[2, 1] == 0 and c.coeffs[2, 2] == Fraction(2, 15)
    assert np.all(c.coeffs[:2] == 0)
    c0 = sidelnikov_certificate(5, 0)
    assert c0.coeffs.shape == (1, 1) and c0.coeffs[0, 0] == 1


@pytest.mark.parametrize("d,l", [(3, 2), (3, 5), (4, 8), (6, 7)])
def test_sidelnikov_certificate_reproduces_kernel(d, l):
    c = sidelnikov_certificate(d, l)
    t = np.linspace(-1, 1, 1001)
    for r, s in [(1.0, 1.0), (0.7, 1.3)]:
        assert np.max(np.abs(c.h(r, s, t) - (r * s * t) ** l)) <= 1e-12 * max(1, (r * s) ** l)


def test_sidelnikov_objective_exact():
    rng = np.random.default_rng(8)
    for d in range(2, 7):
        for l in range(9):
            n = int(rng.integers(1, 6))
            sq = [Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5))) for _ in range(n)]
            w = [Fraction(int(rng.integers(1, 7)), int(rng.integers(1, 4))) for _ in range(n)]
            c = sidelnikov_certificate(d, l)
            assert energy_objective_exact(c, sq, w) == sidelnikov_rhs_exact(d, sq, w, l)


def test_z_matrix():
    assert z_matrix([1], math.sqrt(2)).values[0, 0] == pytest.approx(0, abs=1e-15)
    assert z_matrix([1], PENTAGON_A).values[0, 0] == pytest.approx(math.cos(2 * math.pi / 5), abs=1e-15)
    zm = z_matrix([1, 3], 1)
    assert zm.raw[0, 1] == pytest.approx(1.5)
    assert zm.values[0, 1] == 1.0 and zm.unconstrained[0, 1] and not zm.unconstrained[0, 0]


# ---------------------------------------------------------------- energy


def test_energy_bound_octahedron(octahedron):
    k = Kernel.poly_u([64, -48, 12, -1])
    rep = energy_lower_bound(octahedron, k, 0, 3, 257)
    assert rep.bound == pytest.approx(192, abs=1e-6)
    assert rep.valid and rep.residual <= 1e-9
    assert potential_energy(octahedron, k) == pytest.approx(192, abs=1e-9)
    assert energy_objective(rep.certificate, octahedron) == pytest.approx(rep.bound)


def test_energy_bound_antipodal_pair():
    X = build_configuration(3, [[1, 0, 0], [-1, 0, 0]])
    rep = energy_lower_bound(X, Kernel.inner_power(1), 0, 4, 129)
    assert rep.bound == pytest.approx(-2, abs=1e-9)


@pytest.mark.parametrize(
    "X,t",
    [(generate("cross_polytope", 3), 3), (generate("icosahedron", 3), 5), (generate("polygon", 2, n=6), 5),
     (generate("simplex", 4), 2), (generate("cube", 3), 3)],
)
def test_energy_bound_sharp_on_designs(X, t):
    k = Kernel.poly_u(np.polynomial.polynomial.polypow([4, -1], t))
    # the grid LP can overshoot between nodes by O(grid_n^-2); 1025 nodes keep that below 1e-6
    rep = energy_lower_bound(X, k, 0, t, 1025)
    pe = potential_energy(X, k)
    assert rep.bound == pytest.approx(pe, rel=1e-6)
    assert rep.certified_bound <= pe * (1 + 1e-12)


def _random_shell_config(rng):
    d = int(rng.integers(2, 5))
    n = int(rng.integers(2, 21))
    radii = rng.choice([1.0, 1.5, 2.0], size=n)
    dirs = rng.normal(size=(n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return build_configuration(d, dirs * radii[:, None], rng.uniform(0.2, 2, n))


def test_energy_bound_soundness():
    rng = np.random.default_rng(99)
    kernels = [Kernel.riesz(1), Kernel.poly_u([16, -8, 1])] + [Kernel.inner_power(l) for l in range(1, 5)]
    for trial in range(50):
        X = _random_shell_config(rng)
        k = kernels[trial % len(kernels)]
        rep = energy_lower_bound(X, k, imax=1, jmax=6, grid_n=65)
        pe = potential_energy(X, k)
        assert rep.bound <= pe + 1e-6 * (1 + abs(pe))
        assert rep.certified_bound <= rep.bound + 1e-12
        assert rep.valid == (rep.residual <= 1e-8)


def test_energy_bound_monotone_in_jmax(strong_fixture):
    k = Kernel.riesz(1)
    prev = -math.inf
    for jmax in range(0, 7):
        b = energy_lower_bound(strong_fixture, k, imax=2, jmax=jmax, grid_n=65).bound
        assert b >= prev - 1e-8
        prev = b


def test_energy_bound_nested_grids_never_increase(octahedron):
    # refining n -> 2n - 1 keeps every old node, so the feasible set can only shrink;
    # exchange steps would add grid-dependent nodes, so they are off here
    k = Kernel.riesz(1)
    prev = math.inf
    for n in (17, 33, 65, 129, 257):
        b = energy_lower_bound(octahedron, k, 0, 8, n, refine_rounds=0).bound
        assert b <= prev + 1e-8
        prev = b


def test_energy_bound_design_exponents(strong_fixture):
    k = Kernel.poly_u([16, -8, 1])
    full = energy_lower_bound(strong_fixture, k, 3, 3, 65)
    design = energy_lower_bound(strong_fixture, k, 3, 3, 65, exponents="design")
    assert design.bound <= full.bound + 1e-8
    nz = np.argwhere(design.certificate.coeffs != 0)
    assert all(j == 0 or (i >= j and (i - j) % 2 == 0) for i, j in nz)


def test_energy_bound_singular_nodes_skipped(octahedron):
    rep = energy_lower_bound(octahedron, Kernel.riesz(1), 0, 8, 513)
    pe = potential_energy(octahedron, Kernel.riesz(1))
    assert rep.bound == pytest.approx(pe, rel=1e-6)
    assert rep.verify_n == 16 * 512 + 1


def test_energy_report_serializes(octahedron):
    rep = energy_lower_bound(octahedron, Kernel.poly_u([4, -1]), 0, 2, 33)
    doc = json.loads(json.dumps(rep.to_dict()))
    assert doc["kind"] == "energy" and doc["grid_n"] == 33 and doc["counts"] == [6]


# ---------------------------------------------------------------- codes


def test_circle_code_bound(circle_report):
    rep = circle_report
    assert rep.valid and rep.bound < 5.5
    assert rep.certified_bound < 6
    cert = rep.certified_certificate
    assert code_bound_check([1], [6], PENTAGON_A, cert, 1001).excluded
    v = code_bound_check([1], [5], PENTAGON_A, cert, 1001)
    assert v.verdict == "INCONCLUSIVE"
    assert code_bound_check([1], [0], PENTAGON_A, cert, 1001).verdict == "INCONCLUSIVE"


def test_pentagon_never_excluded(circle_report):
    rng = np.random.default_rng(17)
    pent = generate("polygon", 2, n=5)
    dists = [np.linalg.norm(p - q) for k, p in enumerate(pent.points) for q in pent.points[k + 1:]]
    assert min(dists) >= PENTAGON_A - 1e-12
    for cert in random_feasible_code_certs(circle_report.certified_certificate, PENTAGON_A, rng, 20):
        assert not code_bound_check([1], [5], PENTAGON_A, cert, 1001).excluded


def test_orthoplex_code_bound():
    rep = code_bound_optimize([1], math.sqrt(2), 3, jmax=8)
    assert rep.bound < 7 and rep.certified_bound < 7
    assert not code_bound_check([1], [6], math.sqrt(2), rep.certified_certificate).excluded
    assert code_bound_check([1], [7], math.sqrt(2), rep.certified_certificate).excluded


def _min_distance(X):
    p = X.points
    return min(np.linalg.norm(p[a] - p[b]) for a in range(len(p)) for b in range(a + 1, len(p)))


@pytest.mark.parametrize(
    "X",
    [generate("polygon", 2, n=n) for n in (4, 6, 8)]
    + [generate("cross_polytope", 3), generate("icosahedron", 3), generate("cube", 3), generate("simplex", 3)],
)
def test_code_check_sound_on_catalog(X):
    amin = _min_distance(X)
    for a in np.linspace(0.5, 1.0, 3) * amin:
        rep = code_bound_optimize([1], a, X.d, jmax=12, grid_n=257)
        # the repaired certificate is feasible everywhere, so its bound is rigorous
        assert rep.certified_bound >= len(X) - 1e-9
        assert rep.bound >= len(X) - 1e-6
        assert not code_bound_check([1], [len(X)], a, rep.certified_certificate, 257).excluded


def test_code_check_rejects_infeasible_certificate():
    bad = Certificate(2, np.array([[1.0, 1.0]]), "code")
    with pytest.raises(CertificateInfeasible) as err:
        code_bound_check([1], [3], 1.0, bad)
    assert err.value.worst[2] == pytest.approx(math.cos(2 * math.asin(0.5)))
    with pytest.raises(ValueError):
        code_bound_check([1], [3], 1.0, Certificate(2, np.ones((1, 2)), "energy"))


def test_multishell_decouples_when_shells_far_apart():
    rep = code_bound_optimize([1, 3], 1.2, 2, jmax=16)
    assert rep.extra["unconstrained_pairs"] == [[0, 1], [1, 0]]
    assert rep.extra["per_shell_bounds"] == [4, 15]
    assert rep.bound == 19 and not rep.heuristic


def test_multishell_joint_search():
    rep = code_bound_optimize([1, 1.2], 0.9, 2, imax=2, jmax=8, grid_n=201)
    assert rep.extra["per_shell_bounds"] == [6, 8]
    assert rep.heuristic and rep.bound <= 14
    # all points share the angular cap of the outer shell, so at most 8 directions exist
    assert rep.bound >= 8


def test_multishell_bound_covers_catalog_union():
    X = two_octahedra()
    rep = code_bound_optimize(X.radii, _min_distance(X), 3, imax=2, jmax=8, grid_n=129)
    assert rep.bound >= len(X)


def test_code_bound_errors():
    with pytest.raises(BoundError):
        code_bound_optimize([10], 1.5, 2, jmax=6, grid_n=101)
    with pytest.raises(ValueError):
        code_bound_optimize([1, 1], 1.0, 2)


# ---------------------------------------------------------------- designs


def test_fisher_certificate_values():
    c = fisher_design_certificate(3, 2)
    assert [c.coeffs[j, j] for j in range(3)] == [4, 2, Fraction(6, 5)]
    t = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(c.h(1, 1, t), (1 + 3 * t) ** 2, atol=1e-12)


def test_design_check_reproduces_fisher():
    c = fisher_design_certificate(3, 2)
    assert design_bound_check([1], [1], [3], 2, c).excluded
    assert design_bound_check([1], [1], [4], 2, c).verdict == "INCONCLUSIVE"


@pytest.mark.parametrize("d,t", [(3, 2), (3, 4), (4, 2), (4, 4), (5, 2)])
def test_design_threshold_equals_fisher_value(d, t):
    c = fisher_design_certificate(d, t)
    first_ok = next(n for n in range(1, 100) if not design_bound_check([1], [1], [n], t, c).excluded)
    assert first_ok == fisher_spherical(d, t)


def radial_square_certificate(d, t, k, p):
    """f = (rs)^k p(t)^2 with p even or odd, so every term lies in I(t) when k <= t is even."""
    sq = np.polynomial.polynomial.polypow(p, 2)
    g = power_to_gegenbauer_exact(d, [Fraction(float(v)) for v in sq])
    table = np.full((k + 1, len(g)), Fraction(0), dtype=object)
    table[k, :] = g
    return Certificate(d, table, "design", t)


def test_design_check_sound_on_catalog():
    single = [generate("cross_polytope", 3), generate("icosahedron", 3), generate("cube", 3),
              generate("simplex", 4), generate("polygon", 2, n=7)]
    for X in single:
        for t in range(0, max_strength(X, "euclidean", t_cap=8) + 1):
            v = design_bound_check_configuration(X, t, fisher_design_certificate(X.d, t))
            assert not v.excluded
            assert not design_bound_check_configuration(X, t, fisher_design_certificate(X.d, t), use_pair_counts=True).excluded
    rng = np.random.default_rng(4)
    for w in [(1.0, 3.0), (0.2, 5.0), (2.0, 2.0)]:
        X = two_octahedra(*w)
        for _ in range(5):
            # strength 3 leaves room for deg p^2 <= 2 only
            odd = rng.normal(size=2) * [0, 1]
            for p, k in [(odd, 2), (rng.normal(size=1), 2), ([1.0], 0)]:
                cert = radial_square_certificate(3, 3, k, p)
                assert not design_bound_check_configuration(X, 3, cert).excluded


def test_design_check_squared_polynomial_certificates_feasible(rng):
    for _ in range(10):
        p = rng.normal(size=3) * [1, 0, 1]
        cert = radial_square_certificate(3, 4, 4, p)
        assert not cert.sign_violations()
        design_bound_check([1, 2], [1, 1], [6, 6], 4, cert)


def test_fisher_certificate_needs_unit_product():
    # (rs)^j Q_j keeps the square structure only at rs = 1
    with pytest.raises(CertificateInfeasible):
        design_bound_check([1, 2], [1, 1], [6, 6], 2, fisher_design_certificate(3, 2))


def test_design_check_errors():
    neg = design_certificate_from_t_poly(3, 2, [-1, 0, 1])
    with pytest.raises(CertificateInfeasible):
        design_bound_check([1], [1], [4], 2, neg)
    outside = Certificate(3, np.array([[1.0, 1.0]]), "design", t=2)
    with pytest.raises(CertificateInfeasible):
        design_bound_check([1], [1], [4], 2, outside)
    X = build_configuration(2, [[1, 0], [-1, 0]], [1, 2])
    with pytest.raises(ValueError):
        design_bound_check_configuration(X, 1, fisher_design_certificate(2, 1))


# ---------------------------------------------------------------- closed forms


def test_fisher_values():
    assert fisher_spherical(3, 2) == 4 and fisher_spherical(3, 3) == 6
    assert fisher_spherical(5, 0) == 1
    assert fisher_strong(3, 2) == 8 and fisher_strong(3, 3, antipodal=True) == 12
    assert fisher_strong(4, 0) == 1
    assert fisher_per_sphere(3, 2, 2) == 8 and fisher_per_sphere(3, 3, 2) == 12
    for d in range(2, 7):
        for t in range(7):
            assert fisher_per_sphere(d, t, 1) == fisher_spherical(d, t)
    with pytest.raises(ValueError):
        fisher_strong(3, 3)
    with pytest.raises(ValueError):
        fisher_per_sphere(3, 1, 3)


def test_fisher_binomial_formulas():
    for d in range(2, 8):
        for e in range(5):
            even = comb(d + e - 1, e) + (comb(d + e - 2, e - 1) if e else 0)
            assert fisher_spherical(d, 2 * e) == even
            assert fisher_spherical(d, 2 * e + 1) == 2 * comb(d + e - 1, e)
            assert fisher_strong(d, 2 * e) == (e + 1) * even
            assert fisher_strong(d, 2 * e + 1, True) == 2 * (e + 1) * comb(d + e - 1, e)


def test_fisher_tight_examples():
    assert len(generate("simplex", 3)) == fisher_spherical(3, 2)
    assert len(generate("cross_polytope", 3)) == fisher_spherical(3, 3)
    X = two_octahedra()
    assert len(X) == fisher_strong(3, 3, antipodal=True) and max_strength(X, "strong") == 3
