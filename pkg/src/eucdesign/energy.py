"""Potential energy of weighted configurations and the generalized Sidelnikov inequality."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _backend
from .configspace import Configuration
from .harmonics import sidelnikov_constant

__all__ = [
    "Kernel",
    "SingularKernelError",
    "parse_kernel",
    "potential_energy",
    "generalized_sidelnikov",
    "weighted_sidelnikov",
]

KINDS = ("riesz", "inner_power", "poly_u", "poly_t")


class SingularKernelError(ValueError):
    """Raised when a kernel is infinite at a pair of the configuration."""


def _horner(coeffs, v):
    v = np.asarray(v, dtype=float)
    acc = np.zeros_like(v)
    for c in reversed(coeffs):
        acc = acc * v + c
    return acc


@dataclass(frozen=True)
class Kernel:
    """A pair potential ``f(r, s, t)`` of two radii and the cosine of their angle.

    ``riesz``: ``u^(-s/2)`` with ``u = r^2 + s^2 - 2 r s t``.
    ``poly_u``: ``sum_k c_k u^k``.  ``poly_t``: ``sum_k c_k t^k``.
    ``inner_power``: ``(r s t)^l``.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("riesz", "inner_power") and len(self.params) != 1:
            raise ValueError(f"{self.kind} kernel takes exactly one parameter")
        if self.kind == "inner_power" and (self.params[0] != int(self.params[0]) or self.params[0] < 0):
            raise ValueError("inner_power exponent must be a non-negative integer")
        if self.kind in ("poly_u", "poly_t") and not self.params:
            raise ValueError("polynomial kernel needs at least one coefficient")

    @classmethod
    def riesz(cls, s: float) -> "Kernel":
        return cls("riesz", (float(s),))

    @classmethod
    def inner_power(cls, l: int) -> "Kernel":
        return cls("inner_power", (float(l),))

    @classmethod
    def poly_u(cls, coeffs) -> "Kernel":
        return cls("poly_u", tuple(float(c) for c in coeffs))

    @classmethod
    def poly_t(cls, coeffs) -> "Kernel":
        return cls("poly_t", tuple(float(c) for c in coeffs))

    @property
    def mode(self) -> int:
        return {
            "riesz": _backend.RIESZ,
            "poly_u": _backend.POLY_U,
            "poly_t": _backend.POLY_T,
            "inner_power": _backend.INNER_POWER,
        }[self.kind]

    @property
    def can_be_singular(self) -> bool:
        return self.kind == "riesz" and self.params[0] > 0

    def squared_distance(self, r, s, t):
        r, s, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, s, t)))
        return np.maximum(r * r + s * s - 2 * r * s * t, 0.0)

    def is_singular(self, r, s, t, tol: float = 0.0):
        """Boolean mask of nodes where the kernel is infinite (``u <= tol * (r^2 + s^2)``)."""
        if not self.can_be_singular:
            return np.zeros(np.broadcast(r, s, t).shape, dtype=bool)
        r_, s_ = np.asarray(r, dtype=float), np.asarray(s, dtype=float)
        return self.squared_distance(r, s, t) <= tol * (r_ * r_ + s_ * s_)

    def __call__(self, r, s, t):
        if self.kind == "riesz":
            u = self.squared_distance(r, s, t)
            with np.errstate(divide="ignore"):
                return u ** (-0.5 * self.params[0])
        if self.kind == "poly_u":
            return _horner(self.params, self.squared_distance(r, s, t))
        r, s, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, s, t)))
        if self.kind == "poly_t":
            return _horner(self.params, t)
        l = int(self.params[0])
        return (r * s * t) ** l

    def spec(self) -> str:
        if self.kind == "riesz":
            return f"riesz:s={self.params[0]:g}"
        if self.kind == "inner_power":
            return f"innerpow:l={int(self.params[0])}"
        name = "poly-u" if self.kind == "poly_u" else "poly-t"
        return f"{name}:" + ",".join(f"{c:.17g}" for c in self.params)


def parse_kernel(text: str) -> Kernel:
    """Parse ``riesz:s=<real>``, ``innerpow:l=<int>``, ``poly-u:<c0,c1,...>`` or ``poly-t:<c0,...>``."""
    head, sep, body = text.strip().partition(":")
    if not sep or not body:
        raise ValueError(f"malformed kernel spec {text!r}")
    try:
        if head == "riesz":
            key, _, val = body.partition("=")
            if key != "s":
                raise ValueError("riesz kernel expects s=<real>")
            return Kernel.riesz(float(val))
        if head == "innerpow":
            key, _, val = body.partition("=")
            if key != "l":
                raise ValueError("innerpow kernel expects l=<int>")
            return Kernel.inner_power(int(val))
        if head in ("poly-u", "poly-t"):
            coeffs = [float(c) for c in body.split(",")]
            return Kernel.poly_u(coeffs) if head == "poly-u" else Kernel.poly_t(coeffs)
    except ValueError as exc:
        raise ValueError(f"malformed kernel spec {text!r}: {exc}") from None
    raise ValueError(f"unknown kernel family {head!r}")


def _find_coincident(X: Configuration):
    # sort-based duplicate search; avoids forming all pairs
    order = np.lexsort(X.points.T[::-1])
    pts = X.points[order]
    same = np.all(pts[1:] == pts[:-1], axis=1)
    hits = np.flatnonzero(same)
    if len(hits):
        a, b = sorted((int(order[hits[0]]), int(order[hits[0] + 1])))
        return a, b
    return None


def potential_energy(X: Configuration, kernel: Kernel) -> float:
    """``sum_{x != y} w(x) w(y) f(|x|, |y|, x'.y')`` over ordered pairs."""
    if kernel.can_be_singular:
        pair = _find_coincident(X)
        if pair is not None:
            raise SingularKernelError(f"kernel {kernel.spec()} is singular at coincident points {pair[0]} and {pair[1]}")
    params = np.asarray(kernel.params, dtype=float)
    return float(_backend.pair_energy(X.points, X.unit_points, X.weights, kernel.mode, params))


def _inner_power_sum(X: Configuration, radial: int, l: int) -> float:
    # sum_{x,y} w w (|x||y|)^radial (x.y)^l in row chunks
    total = 0.0
    pts, w, nr = X.points, X.weights, X.norms
    wr = w * nr**radial
    for lo in range(0, len(pts), 256):
        g = pts[lo : lo + 256] @ pts.T
        total += float(wr[lo : lo + 256] @ (g**l) @ wr)
    return total


def weighted_sidelnikov(X: Configuration, j: int, l: int) -> tuple[float, float]:
    """Both sides of ``sum w w (|x||y|)^(2j) (x.y)^l >= A_l (sum w |x|^(2j+l))^2``."""
    if j < 0 or l < 0:
        raise ValueError("j and l must be non-negative")
    lhs = _inner_power_sum(X, 2 * j, l)
    a_l = sidelnikov_constant(X.d, l)
    rhs = float(a_l) * float(np.sum(X.weights * X.norms ** (2 * j + l))) ** 2
    return lhs, rhs


def generalized_sidelnikov(X: Configuration, l: int) -> tuple[float, float]:
    """Both sides of ``sum w w (x.y)^l >= A_l (sum w |x|^l)^2``."""
    return weighted_sidelnikov(X, 0, l)


def sidelnikov_rhs_exact(d: int, sq_norms, weights, l: int) -> Fraction:
    """``A_l (sum w |x|^l)^2 - sum w^2 |x|^(2l)`` in exact arithmetic.

    ``sq_norms`` are the squared norms; for odd ``l`` the first term vanishes.
    """
    sq = [Fraction(v) for v in sq_norms]
    ws = [Fraction(v) for v in weights]
    diag = sum((w * w * s**l for w, s in zip(ws, sq)), Fraction(0))
    a_l = sidelnikov_constant(d, l)
    if a_l == 0:
        return -diag
    total = sum((w * s ** (l // 2) for w, s in zip(ws, sq)), Fraction(0))
    return a_l * total * total - diag
