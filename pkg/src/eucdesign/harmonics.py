"""Gegenbauer polynomials normalized by harmonic-space dimension.

``Q_j^{(d)}`` is orthogonal on [-1, 1] for the weight ``(1 - t^2)^((d-3)/2)``
and scaled so that ``Q_j(1) = dim Harm_j(R^d)``.  Coefficients are stored as
exact rationals; floats only appear when a table is evaluated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

__all__ = [
    "GegenbauerTable",
    "MonomialExpansion",
    "double_factorial",
    "harm_dim",
    "gegenbauer_table",
    "gegenbauer_eval",
    "sidelnikov_constant",
    "monomial_expansion",
    "gegenbauer_to_power",
    "gegenbauer_to_power_exact",
    "power_to_gegenbauer_exact",
]

_T_SLACK = 1e-12


def double_factorial(n: int) -> int:
    """``n!!`` with the convention ``n!! = 1`` for ``n <= 0``."""
    out = 1
    while n > 0:
        out *= n
        n -= 2
    return out


def harm_dim(d: int, l: int) -> int:
    """Dimension of the space of harmonic homogeneous polynomials of degree l in d variables."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if l < 0:
        raise ValueError(f"degree must be >= 0, got {l}")
    lower = comb(d + l - 3, l - 2) if l >= 2 else 0
    return comb(d + l - 1, l) - lower


@dataclass(frozen=True)
class GegenbauerTable:
    """Three-term recurrence for the normalized family ``Q_0 .. Q_max_degree``.

    ``Q_0 = 1``, ``Q_1 = alpha[1] * t`` and
    ``Q_j = alpha[j] * t * Q_{j-1} - beta[j] * Q_{j-2}`` for ``j >= 2``.
    ``norm[j]`` is the factor taking the classical polynomial to ``Q_j``.
    """

    d: int
    max_degree: int
    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    norm: tuple[Fraction, ...]
    _alpha_f: np.ndarray = field(init=False, repr=False, compare=False)
    _beta_f: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.array([float(x) for x in self.alpha])
        b = np.array([float(x) for x in self.beta])
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "_alpha_f", a)
        object.__setattr__(self, "_beta_f", b)

    @property
    def alpha_float(self) -> np.ndarray:
        return self._alpha_f

    @property
    def beta_float(self) -> np.ndarray:
        return self._beta_f

    def evaluate_all(self, t, upto: int | None = None) -> np.ndarray:
        """Return an array of shape ``(upto + 1,) + shape(t)`` holding ``Q_j(t)``."""
        n = self.max_degree if upto is None else upto
        if n > self.max_degree:
            raise ValueError(f"degree {n} exceeds table max_degree {self.max_degree}")
        t = np.asarray(t, dtype=float)
        _check_domain(t)
        out = np.empty((n + 1,) + t.shape)
        out[0] = 1.0
        if n >= 1:
            out[1] = self._alpha_f[1] * t
        for j in range(2, n + 1):
            out[j] = self._alpha_f[j] * t * out[j - 1] - self._beta_f[j] * out[j - 2]
        return out

    def __call__(self, j: int, t):
        return gegenbauer_eval(self, j, t)


def _check_domain(t: np.ndarray) -> None:
    if t.size and np.max(np.abs(t)) > 1.0 + _T_SLACK:
        raise ValueError("Gegenbauer argument outside [-1, 1]")


@lru_cache(maxsize=None)
def gegenbauer_table(d: int, max_degree: int) -> GegenbauerTable:
    """Build the recurrence table for ``Q_j^{(d)}``, ``j <= max_degree``.

    For ``d >= 3`` the classical recurrence with ``lambda = (d - 2) / 2`` is
    rescaled degreewise by ``(j + lambda) / lambda``.  ``d = 2`` uses the
    Chebyshev limit ``Q_j = 2 T_j`` (``j >= 1``).
    """
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    n = max_degree
    # classical family P_j = a_j t P_{j-1} - b_j P_{j-2}, Q_j = c_j P_j
    a = [Fraction(0)] * (n + 1)
    b = [Fraction(0)] * (n + 1)
    c = [Fraction(1)] * (n + 1)
    if d == 2:
        for j in range(1, n + 1):
            a[j] = Fraction(1) if j == 1 else Fraction(2)
            b[j] = Fraction(0) if j == 1 else Fraction(1)
            c[j] = Fraction(2)
    else:
        lam = Fraction(d - 2, 2)
        for j in range(1, n + 1):
            a[j] = 2 * (j + lam - 1) / j
            b[j] = (j + 2 * lam - 2) / j if j >= 2 else Fraction(0)
            c[j] = (j + lam) / lam
    alpha = [Fraction(0)] * (n + 1)
    beta = [Fraction(0)] * (n + 1)
    for j in range(1, n + 1):
        alpha[j] = c[j] * a[j] / c[j - 1]
        if j >= 2:
            beta[j] = c[j] * b[j] / c[j - 2]
    return GegenbauerTable(d, n, tuple(alpha), tuple(beta), tuple(c))


def gegenbauer_eval(table: GegenbauerTable, j: int, t):
    """Evaluate ``Q_j(t)`` by the recurrence; ``t`` may be a scalar or array."""
    if j < 0 or j > table.max_degree:
        raise ValueError(f"degree {j} outside table range 0..{table.max_degree}")
    vals = table.evaluate_all(t, upto=j)[j]
    return float(vals) if vals.ndim == 0 else vals


def sidelnikov_constant(d: int, l: int) -> Fraction:
    """``A_l = (l-1)!! (d-2)!! / (d+l-2)!!`` for even l, else 0."""
    if l % 2:
        return Fraction(0)
    return Fraction(double_factorial(l - 1) * double_factorial(d - 2), double_factorial(d + l - 2))


@dataclass(frozen=True)
class MonomialExpansion:
    """``t^l = sum_i coefficients[i] * Q_{l-i}(t)``."""

    d: int
    l: int
    coefficients: tuple[Fraction, ...]

    def evaluate(self, t) -> np.ndarray:
        table = gegenbauer_table(self.d, max(self.l, 0))
        q = table.evaluate_all(t, upto=self.l)
        out = np.zeros(np.shape(t))
        for i, a in enumerate(self.coefficients):
            if a:
                out = out + float(a) * q[self.l - i]
        return out


def monomial_expansion(d: int, l: int) -> MonomialExpansion:
    """Exact ``A_{l,i} = l! (d-2)!! / (i!! (d+2l-i-2)!!)`` for even ``i``, zero for odd ``i``.

    The numerator is ``l!``; with ``l!!`` in its place the identity
    ``t^l = sum A_{l,i} Q_{l-i}`` already fails at ``l = 3``.
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    num = factorial(l) * double_factorial(d - 2)
    coeffs = tuple(
        Fraction(num, double_factorial(i) * double_factorial(d + 2 * l - i - 2)) if i % 2 == 0 else Fraction(0)
        for i in range(l + 1)
    )
    return MonomialExpansion(d, l, coeffs)


@lru_cache(maxsize=None)
def _power_coefficients(d: int, n: int) -> tuple[tuple[Fraction, ...], ...]:
    # row j: power-basis coefficients of Q_j, built from the exact recurrence
    table = gegenbauer_table(d, n)
    rows = [[Fraction(1)] + [Fraction(0)] * n]
    if n >= 1:
        rows.append([Fraction(0), table.alpha[1]] + [Fraction(0)] * (n - 1))
    for j in range(2, n + 1):
        prev, prev2 = rows[j - 1], rows[j - 2]
        row = [Fraction(0)] * (n + 1)
        for k in range(n):
            row[k + 1] += table.alpha[j] * prev[k]
        for k in range(n + 1):
            row[k] -= table.beta[j] * prev2[k]
        rows.append(row)
    return tuple(tuple(r) for r in rows)


def gegenbauer_to_power(d: int, coeffs) -> np.ndarray:
    """Convert ``sum_j coeffs[j] Q_j(t)`` to ascending power-basis coefficients."""
    coeffs = list(coeffs)
    n = len(coeffs) - 1
    if n < 0:
        return np.zeros(1)
    rows = _power_coefficients(d, n)
    mat = np.array([[float(x) for x in r] for r in rows])
    return np.asarray(coeffs, dtype=float) @ mat


def gegenbauer_to_power_exact(d: int, coeffs) -> list[Fraction]:
    """Exact version of :func:`gegenbauer_to_power` over rationals."""
    coeffs = [Fraction(c) for c in coeffs]
    n = len(coeffs) - 1
    rows = _power_coefficients(d, n)
    out = [Fraction(0)] * (n + 1)
    for c, row in zip(coeffs, rows):
        if c:
            for k, v in enumerate(row):
                out[k] += c * v
    return out


def power_to_gegenbauer_exact(d: int, coeffs) -> list[Fraction]:
    """Coefficients ``g`` with ``sum_k coeffs[k] t^k = sum_j g[j] Q_j(t)``, exactly."""
    coeffs = [Fraction(c) for c in coeffs]
    out = [Fraction(0)] * len(coeffs)
    for l, c in enumerate(coeffs):
        if not c:
            continue
        for i, a in enumerate(monomial_expansion(d, l).coefficients):
            if a:
                out[l - i] += c * a
    return out
