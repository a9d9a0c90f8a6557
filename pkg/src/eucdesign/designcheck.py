"""Moment sums and t-design predicates (spherical, Euclidean, strong Euclidean).

All double sums run over ordered pairs, including ``x = y``.  A moment is
compared against its diagonal part, so thresholds do not depend on scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly

from . import _backend
from .configspace import Configuration
from .harmonics import gegenbauer_table, harm_dim

__all__ = [
    "DEFAULT_EPS",
    "MomentReport",
    "DesignCheck",
    "moment_report",
    "moment",
    "is_spherical_design",
    "is_euclidean_design",
    "is_strong_design",
    "max_strength",
    "harmonic_basis",
    "harmonic_moment_check",
]

DEFAULT_EPS = 1e-9


@dataclass(frozen=True)
class MomentReport:
    """``values[i, j] = sum_{x,y} w(x) w(y) (|x||y|)^i Q_j(x'.y')`` and its diagonal scale."""

    d: int
    values: np.ndarray
    scale: np.ndarray

    @property
    def imax(self) -> int:
        return self.values.shape[0] - 1

    @property
    def jmax(self) -> int:
        return self.values.shape[1] - 1

    def residual(self, i: int, j: int) -> float:
        return float(self.values[i, j] / self.scale[i, j])

    def rows(self):
        for i in range(self.imax + 1):
            for j in range(self.jmax + 1):
                yield i, j, float(self.values[i, j]), float(self.scale[i, j])


def moment_report(X: Configuration, imax: int, jmax: int) -> MomentReport:
    table = gegenbauer_table(X.d, max(jmax, 1))
    vals = _backend.pair_moments(X.unit_points, X.norms, X.weights, table.alpha_float, table.beta_float, imax, jmax)
    w2 = X.weights**2
    diag = np.array([np.sum(w2 * X.norms ** (2 * i)) for i in range(imax + 1)])
    q1 = np.array([harm_dim(X.d, j) for j in range(jmax + 1)], dtype=float)
    return MomentReport(X.d, vals, diag[:, None] * q1[None, :])


def moment(X: Configuration, i: int, j: int) -> float:
    if i < 0 or j < 0:
        raise ValueError("moment indices must be non-negative")
    return float(moment_report(X, i, j).values[i, j])


@dataclass(frozen=True)
class DesignCheck:
    """Outcome of a design predicate; truthy when the design condition holds."""

    holds: bool
    t: int
    eps: float
    residuals: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds

    @property
    def max_residual(self) -> float:
        return max((abs(v) for v in self.residuals.values()), default=0.0)


def _check(X: Configuration, t: int, eps: float, index_pairs) -> DesignCheck:
    index_pairs = list(index_pairs)
    if not index_pairs:
        return DesignCheck(True, t, eps, {})
    imax = max(i for i, _ in index_pairs)
    jmax = max(j for _, j in index_pairs)
    rep = moment_report(X, imax, jmax)
    res = {(i, j): rep.residual(i, j) for i, j in index_pairs}
    holds = all(abs(v) <= eps for v in res.values())
    return DesignCheck(holds, t, eps, res)


def _require_t(t: int) -> None:
    if t < 0:
        raise ValueError("design strength t must be >= 0")


def is_spherical_design(X: Configuration, t: int, eps: float = DEFAULT_EPS) -> DesignCheck:
    """Spherical t-design test on a single shell: ``moment(0, j) = 0`` for ``1 <= j <= t``."""
    _require_t(t)
    if X.n_shells != 1:
        raise ValueError(f"spherical design check needs a single shell, got {X.n_shells}")
    return _check(X, t, eps, [(0, j) for j in range(1, t + 1)])


def euclidean_indices(t: int):
    return [(l + 2 * j, l) for l in range(1, t + 1) for j in range((t - l) // 2 + 1)]


def strong_indices(t: int):
    return [(i, j) for i in range(t + 1) for j in range(1, t + 1)]


def is_euclidean_design(X: Configuration, t: int, eps: float = DEFAULT_EPS) -> DesignCheck:
    """Euclidean t-design test: ``moment(l + 2j, l) = 0`` for ``1 <= l <= t``, ``2j <= t - l``."""
    _require_t(t)
    return _check(X, t, eps, euclidean_indices(t))


def is_strong_design(X: Configuration, t: int, eps: float = DEFAULT_EPS) -> DesignCheck:
    """Strong Euclidean t-design test: ``moment(i, j) = 0`` for ``0 <= i <= t``, ``1 <= j <= t``."""
    _require_t(t)
    return _check(X, t, eps, strong_indices(t))


_PREDICATES = {
    "spherical": is_spherical_design,
    "euclidean": is_euclidean_design,
    "strong": is_strong_design,
}


def max_strength(X: Configuration, mode: str = "spherical", t_cap: int = 12, eps: float = DEFAULT_EPS) -> int:
    """Largest ``t <= t_cap`` for which the predicate of ``mode`` holds (0 at worst)."""
    try:
        pred = _PREDICATES[mode]
    except KeyError:
        raise ValueError(f"unknown design mode {mode!r}") from None
    if t_cap < 0:
        raise ValueError("t_cap must be >= 0")
    # each predicate is monotone in t, so scan upward
    best = 0
    for t in range(1, t_cap + 1):
        if not pred(X, t, eps):
            break
        best = t
    return best


def _legendre_derivative(l: int, m: int) -> np.ndarray:
    c = npleg.leg2poly([0] * l + [1])
    return nppoly.polyder(c, m) if m else c


def harmonic_basis(d: int, l: int):
    """Explicit orthogonal basis of ``Harm_l(R^d)`` for ``d`` in {2, 3}.

    Returns a list of callables mapping an ``(n, d)`` array to ``(n,)`` values.
    """
    if d not in (2, 3):
        raise ValueError(f"explicit harmonic bases are only tabulated for d <= 3, got d={d}")
    if l < 0:
        raise ValueError("degree must be >= 0")
    basis = []
    if d == 2:
        if l == 0:
            return [lambda p: np.ones(len(p))]
        basis.append(lambda p, l=l: ((p[:, 0] + 1j * p[:, 1]) ** l).real)
        basis.append(lambda p, l=l: ((p[:, 0] + 1j * p[:, 1]) ** l).imag)
        return basis
    # solid harmonics (x + iy)^m r^(l-m) P_l^(m)(z / r)
    for m in range(l + 1):
        deriv = _legendre_derivative(l, m)

        def radial(p, deriv=deriv, m=m):
            r = np.linalg.norm(p, axis=1)
            return r ** (l - m) * nppoly.polyval(p[:, 2] / r, deriv)

        basis.append(lambda p, m=m, radial=radial: ((p[:, 0] + 1j * p[:, 1]) ** m).real * radial(p))
        if m:
            basis.append(lambda p, m=m, radial=radial: ((p[:, 0] + 1j * p[:, 1]) ** m).imag * radial(p))
    assert len(basis) == harm_dim(3, l)
    return basis


def _reference_sphere(d: int, n: int = 2000) -> np.ndarray:
    # deterministic near-uniform sample, used only to size each basis harmonic
    k = np.arange(n) + 0.5
    if d == 2:
        ang = 2 * np.pi * k / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    z = 1 - 2 * k / n
    ang = np.pi * (1 + 5**0.5) * k
    rho = np.sqrt(1 - z**2)
    return np.column_stack([rho * np.cos(ang), rho * np.sin(ang), z])


def harmonic_moment_check(X: Configuration, t: int, eps: float = DEFAULT_EPS, strong: bool = False) -> DesignCheck:
    """Euclidean-design test through explicit harmonics (``d <= 3``).

    Checks ``sum_x w(x) |x|^(2j) phi(x) = 0`` for every basis harmonic ``phi``
    of degree ``1 <= l <= t`` and ``0 <= j <= (t - l) / 2``.  With
    ``strong=True`` the radial factor is ``|x|^k`` for ``-l <= k <= t - l``,
    the harmonic form of the strong-design condition.
    """
    _require_t(t)
    if X.d > 3:
        raise ValueError(f"harmonic basis tables only cover d <= 3, got d={X.d}")
    res = {}
    for l in range(1, t + 1):
        exps = range(-l, t - l + 1) if strong else [2 * j for j in range((t - l) // 2 + 1)]
        for b, phi in enumerate(harmonic_basis(X.d, l)):
            vals = phi(X.points)
            size = float(np.sqrt(np.mean(phi(_reference_sphere(X.d)) ** 2)))
            for e in exps:
                terms = X.weights * X.norms**e * vals
                scale = size * np.sum(X.weights * X.norms ** (e + l))
                res[(l, e, b)] = float(np.sum(terms) / scale)
    holds = all(abs(v) <= eps for v in res.values())
    return DesignCheck(holds, t, eps, res)
