"""Linear-programming bounds for configurations on concentric spheres.

Every bound works with functions of the form

    h(r, s, t) = sum_{i,j} a[i, j] (r s)^i Q_j(t)

which are linear in the coefficient table ``a``.  Three sign patterns occur:

``energy``  ``a[i, j] >= 0`` for ``j >= 1``; ``a[i, 0]`` free.
``code``    every ``a[i, j] >= 0``.
``design``  ``a[i, j] <= 0`` outside the index set ``I(t)``.

Continuum constraints are imposed on Chebyshev grids and re-verified
afterwards; reports carry the raw bound and the worst residual side by side.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb

import numpy as np
from numpy.polynomial import polynomial as nppoly

from .configspace import Configuration
from .energy import Kernel
from .harmonics import (
    gegenbauer_table,
    gegenbauer_to_power,
    gegenbauer_to_power_exact,
    harm_dim,
    monomial_expansion,
    power_to_gegenbauer_exact,
)
from .lpsolver import LinearProgram, solve

__all__ = [
    "PATTERNS",
    "Certificate",
    "BoundReport",
    "IndexSetI",
    "ZMatrix",
    "Verdict",
    "BoundError",
    "CertificateInfeasible",
    "chebyshev_grid",
    "index_set",
    "energy_lower_bound",
    "energy_objective",
    "energy_objective_exact",
    "sidelnikov_certificate",
    "z_matrix",
    "code_bound_check",
    "code_bound_optimize",
    "design_bound_check",
    "design_bound_check_configuration",
    "fisher_design_certificate",
    "fisher_spherical",
    "fisher_strong",
    "fisher_per_sphere",
]

PATTERNS = ("energy", "code", "design")
EXCLUDED = "EXCLUDED"
INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_GRID = 513
DEFAULT_VERIFY_FACTOR = 16
FEAS_TOL = 1e-9
VERDICT_TOL = 1e-9


class BoundError(RuntimeError):
    """The LP behind a bound did not produce a usable optimum."""


class CertificateInfeasible(ValueError):
    """A certificate violates its feasibility condition; carries the worst node."""

    def __init__(self, message: str, worst: tuple[float, float, float], value: float):
        super().__init__(message)
        self.worst = worst
        self.value = value


# ---------------------------------------------------------------- certificates


@dataclass(frozen=True)
class IndexSetI:
    """``{(i, j): 0 <= i <= t and (j = 0 or i - j is even and >= 0)}``."""

    t: int
    members: frozenset

    def __contains__(self, item) -> bool:
        return tuple(item) in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)


def index_set(t: int) -> IndexSetI:
    if t < 0:
        raise ValueError("t must be >= 0")
    members = {(i, 0) for i in range(t + 1)}
    members |= {(i, j) for i in range(t + 1) for j in range(1, i + 1) if (i - j) % 2 == 0}
    return IndexSetI(t, frozenset(members))


@dataclass(frozen=True, eq=False)
class Certificate:
    """Coefficient table ``coeffs[i, j]`` of ``h = sum a_ij (rs)^i Q_j(t)``.

    ``coeffs`` is a float array or an object array of :class:`Fraction`.
    ``t`` is only meaningful for the ``design`` pattern.
    """

    d: int
    coeffs: np.ndarray
    pattern: str
    t: int | None = None

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown sign pattern {self.pattern!r}")
        c = np.asarray(self.coeffs)
        if c.ndim != 2:
            raise ValueError("certificate coefficients must be a 2-d table")
        if self.pattern == "design" and self.t is None:
            raise ValueError("design certificates need the design strength t")
        object.__setattr__(self, "coeffs", c)

    @property
    def imax(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def jmax(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    def as_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.coeffs], dtype=float)

    def scale(self) -> float:
        m = float(np.max(np.abs(self.as_float()))) if self.coeffs.size else 0.0
        return m if m > 0 else 1.0

    def sign_violations(self) -> list[tuple[int, int]]:
        """Indices whose coefficient breaks the sign pattern (exact comparison)."""
        bad = []
        design = index_set(self.t) if self.pattern == "design" else None
        for i in range(self.imax + 1):
            for j in range(self.jmax + 1):
                v = self.coeffs[i, j]
                if self.pattern == "energy" and j >= 1 and v < 0:
                    bad.append((i, j))
                elif self.pattern == "code" and v < 0:
                    bad.append((i, j))
                elif self.pattern == "design" and (i, j) not in design and v > 0:
                    bad.append((i, j))
        return bad

    def t_coefficients(self, r: float, s: float) -> np.ndarray:
        """Gegenbauer coefficients of ``t -> h(r, s, t)``."""
        a = self.as_float()
        rs = (r * s) ** np.arange(self.imax + 1)
        return rs @ a

    def h(self, r, s, t) -> np.ndarray:
        r, s, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, s, t)))
        q = gegenbauer_table(self.d, max(self.jmax, 1)).evaluate_all(t, upto=self.jmax)
        a = self.as_float()
        rs = r * s
        out = np.zeros(t.shape)
        for i in range(self.imax + 1):
            radial = rs**i
            for j in range(self.jmax + 1):
                if a[i, j]:
                    out = out + a[i, j] * radial * q[j]
        return out

    def h_exact(self, rs_power, j_values) -> Fraction:
        """``sum a_ij rs_power(i) q_j`` for exact inputs (callables/sequences of Fractions)."""
        total = Fraction(0)
        for i in range(self.imax + 1):
            for j in range(self.jmax + 1):
                v = self.coeffs[i, j]
                if v:
                    total += Fraction(v) * rs_power(i) * j_values[j]
        return total

    def to_dict(self) -> dict:
        rows = []
        for i in range(self.imax + 1):
            for j in range(self.jmax + 1):
                v = self.coeffs[i, j]
                if not v:
                    continue
                if isinstance(v, Fraction):
                    rows.append([i, j, v.numerator, v.denominator])
                else:
                    rows.append([i, j, float(v)])
        doc = {"d": self.d, "pattern": self.pattern, "imax": self.imax, "jmax": self.jmax, "coefficients": rows}
        if self.t is not None:
            doc["t"] = self.t
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Certificate":
        try:
            d = int(doc["d"])
            pattern = doc["pattern"]
            rows = doc["coefficients"]
            imax = int(doc.get("imax", max((int(r[0]) for r in rows), default=0)))
            jmax = int(doc.get("jmax", max((int(r[1]) for r in rows), default=0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed certificate document: {exc}") from None
        exact = all(len(r) == 4 for r in rows)
        table = np.full((imax + 1, jmax + 1), Fraction(0), dtype=object) if exact else np.zeros((imax + 1, jmax + 1))
        for r in rows:
            i, j = int(r[0]), int(r[1])
            if len(r) == 4:
                val = Fraction(int(r[2]), int(r[3]))
            elif len(r) == 3:
                val = float(r[2])
            else:
                raise ValueError(f"malformed certificate row {r!r}")
            table[i, j] = val if exact else float(val)
        t = doc.get("t")
        return cls(d, table, pattern, None if t is None else int(t))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Certificate":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed certificate file: {exc}") from None
        return cls.from_dict(doc)


@dataclass
class BoundReport:
    """Result of an optimized bound together with its verification diagnostics."""

    kind: str
    bound: float
    certificate: Certificate | None
    residual: float
    raw_residual: float
    grid_n: int
    verify_n: int
    radii: list
    counts: list
    shell_weights: list
    valid: bool
    certified_bound: float | None = None
    certified_certificate: Certificate | None = None
    heuristic: bool = False
    lp_status: str = "optimal"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "bound": self.bound,
            "certified_bound": self.certified_bound,
            "valid": self.valid,
            "heuristic": self.heuristic,
            "residual": self.residual,
            "raw_residual": self.raw_residual,
            "grid_n": self.grid_n,
            "verify_n": self.verify_n,
            "radii": [float(r) for r in self.radii],
            "counts": list(self.counts),
            "shell_weights": [float(w) for w in self.shell_weights],
            "lp_status": self.lp_status,
            "certificate": self.certificate.to_dict() if self.certificate is not None else None,
        }
        if self.certified_certificate is not None:
            doc["certified_certificate"] = self.certified_certificate.to_dict()
        doc.update(self.extra)
        return doc


# ---------------------------------------------------------------- grids and extrema


def chebyshev_grid(n: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """``n`` Chebyshev extrema mapped to ``[lo, hi]``, ascending, endpoints included."""
    if n < 1:
        raise ValueError("grid needs at least one node")
    if n == 1 or hi <= lo:
        return np.array([hi])
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    g = lo + (hi - lo) * (x + 1) / 2
    g[0], g[-1] = lo, hi
    return g


def _poly_max(d: int, qcoef: np.ndarray, lo: float, hi: float, n_grid: int) -> tuple[float, float]:
    """Maximum of ``sum qcoef[j] Q_j(t)`` on ``[lo, hi]``.

    Candidates are grid nodes plus real critical points; values come from the
    recurrence so the power basis only locates stationary points.
    """
    table = gegenbauer_table(d, max(len(qcoef) - 1, 1))
    cands = [chebyshev_grid(n_grid, lo, hi)]
    if len(qcoef) > 2 and hi > lo:
        pw = gegenbauer_to_power(d, qcoef)
        der = nppoly.polyder(pw)
        nz = np.flatnonzero(np.abs(der) > 1e-300)
        if len(nz) and nz[-1] >= 1:
            roots = nppoly.polyroots(der[: nz[-1] + 1])
            real = roots[np.abs(roots.imag) <= 1e-6 * (1 + np.abs(roots.real))].real
            cands.append(real[(real >= lo) & (real <= hi)])
    t = np.concatenate(cands)
    vals = table.evaluate_all(t, upto=len(qcoef) - 1).T @ qcoef
    k = int(np.argmax(vals))
    return float(vals[k]), float(t[k])


def _shell_pairs(radii):
    return list(combinations_with_replacement(range(len(radii)), 2))


def _peaks(t: np.ndarray, gap: np.ndarray, thresh: float, limit: int = 8) -> np.ndarray:
    """Nodes of the largest local maxima of ``gap`` that exceed ``thresh``."""
    if gap.size == 0:
        return gap
    g = np.concatenate([[-np.inf], gap, [-np.inf]])
    is_peak = (g[1:-1] >= g[:-2]) & (g[1:-1] >= g[2:]) & (gap > thresh)
    idx = np.flatnonzero(is_peak)
    idx = idx[np.argsort(-gap[idx])][:limit]
    out = []
    for k in idx:
        out.append(t[k])
        if 0 < k < len(t) - 1:
            # vertex of the parabola through the three nodes around the peak
            x0, x1, x2 = t[k - 1 : k + 2]
            y0, y1, y2 = gap[k - 1 : k + 2]
            den = (x0 - x1) * (x0 - x2) * (x1 - x2)
            qa = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
            qb = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den
            if qa < 0:
                v = -qb / (2 * qa)
                if x0 < v < x2:
                    out.append(v)
    return np.unique(out)


def _local_sup(func, t: np.ndarray, gap: np.ndarray, thresh: float, limit: int = 64, iters: int = 60):
    """Max of ``gap`` after golden-section search around its largest local maxima.

    Also returns the refined maximizers whose value exceeds ``thresh``.

    ``func`` evaluates the gap at arbitrary points; grid maxima alone miss
    near-touching peaks that fall between nodes.
    """
    if gap.size == 0:
        return -np.inf, np.empty(0)
    g = np.concatenate([[-np.inf], gap, [-np.inf]])
    idx = np.flatnonzero((g[1:-1] >= g[:-2]) & (g[1:-1] >= g[2:]))
    idx = idx[np.argsort(-gap[idx])][:limit]
    a, b = t[np.maximum(idx - 1, 0)], t[np.minimum(idx + 1, len(t) - 1)]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    ratio = (np.sqrt(5.0) - 1) / 2
    x1 = hi - ratio * (hi - lo)
    x2 = lo + ratio * (hi - lo)
    f1, f2 = func(x1), func(x2)
    for _ in range(iters):
        left = f1 >= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x2n = np.where(left, x1, lo + ratio * (hi - lo))
        x1n = np.where(left, hi - ratio * (hi - lo), x2)
        fn = func(np.where(left, x1n, x2n))
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
        x1, x2 = x1n, x2n
    xs = np.where(f1 >= f2, x1, x2)
    fs = np.maximum(f1, f2)
    return float(max(np.max(gap), np.max(fs))), np.clip(xs[fs > thresh], -1.0, 1.0)


# ---------------------------------------------------------------- energy bound


def _energy_terms(imax: int, jmax: int, exponents: str) -> list[tuple[int, int]]:
    if exponents not in ("all", "design"):
        raise ValueError(f"unknown exponent mode {exponents!r}")
    terms = []
    for i in range(imax + 1):
        for j in range(jmax + 1):
            if exponents == "design" and j >= 1 and (i < j or (i - j) % 2):
                continue
            terms.append((i, j))
    return terms


def energy_objective(cert: Certificate, X: Configuration) -> float:
    """``sum_i a_i0 (sum w |x|^i)^2 - sum_x w(x)^2 h(|x|, |x|, 1)``."""
    a = cert.as_float()
    q1 = np.array([harm_dim(cert.d, j) for j in range(cert.jmax + 1)], dtype=float)
    w2 = X.weights**2
    total = 0.0
    for i in range(cert.imax + 1):
        s_i = float(np.sum(X.weights * X.norms**i))
        total += a[i, 0] * s_i * s_i
        total -= float(np.sum(w2 * X.norms ** (2 * i))) * float(a[i] @ q1)
    return total


def energy_objective_exact(cert: Certificate, sq_norms, weights) -> Fraction:
    """Exact objective for rational weights and squared norms.

    Radial sums ``sum w |x|^i`` are only exact for even ``i``; a nonzero
    ``a_i0`` at odd ``i`` raises.
    """
    sq = [Fraction(v) for v in sq_norms]
    ws = [Fraction(v) for v in weights]
    total = Fraction(0)
    for i in range(cert.imax + 1):
        a0 = Fraction(cert.coeffs[i, 0])
        if a0:
            if i % 2:
                raise ValueError("odd radial exponent in g_0 has no exact value")
            s_i = sum((w * s ** (i // 2) for w, s in zip(ws, sq)), Fraction(0))
            total += a0 * s_i * s_i
        h1 = sum((Fraction(cert.coeffs[i, j]) * harm_dim(cert.d, j) for j in range(cert.jmax + 1)), Fraction(0))
        if h1:
            total -= h1 * sum((w * w * s**i for w, s in zip(ws, sq)), Fraction(0))
    return total


def energy_lower_bound(
    X: Configuration,
    kernel: Kernel,
    imax: int = 0,
    jmax: int = 8,
    grid_n: int = DEFAULT_GRID,
    exponents: str = "all",
    verify_factor: int = DEFAULT_VERIFY_FACTOR,
    tol: float = FEAS_TOL,
    refine_rounds: int = 16,
) -> BoundReport:
    """Best lower bound on ``potential_energy(X, kernel)`` over monomial certificates.

    Maximizes the certificate objective subject to ``h <= f`` on every pair of
    shell radii and every node of a ``grid_n``-point Chebyshev grid, then
    re-checks ``h <= f`` on a grid ``verify_factor`` times finer.  Nodes where
    ``f`` is infinite (coincident points) are left unconstrained.

    If the fine check finds violations, up to ``refine_rounds`` exchange steps
    add the worst fine-grid peaks as constraints and re-solve.  The original
    Chebyshev nodes always stay, so the final grid is a superset of them.
    """
    if imax < 0 or jmax < 0 or grid_n < 2:
        raise ValueError("need imax >= 0, jmax >= 0 and grid_n >= 2")
    d = X.d
    terms = _energy_terms(imax, jmax, exponents)
    table = gegenbauer_table(d, max(jmax, 1))
    radii = X.radii
    q1 = np.array([harm_dim(d, j) for j in range(jmax + 1)], dtype=float)
    w2 = X.weights**2
    s = [float(np.sum(X.weights * X.norms**i)) for i in range(imax + 1)]
    diag = [float(np.sum(w2 * X.norms ** (2 * i))) for i in range(imax + 1)]
    c = np.array([(s[i] ** 2 if j == 0 else 0.0) - diag[i] * q1[j] for i, j in terms])
    free = np.array([j == 0 for _, j in terms])

    pairs = _shell_pairs(radii)
    nodes = {pq: chebyshev_grid(grid_n) for pq in pairs}
    verify_n = verify_factor * (grid_n - 1) + 1
    fine = chebyshev_grid(verify_n)
    # residuals are relative to max(max|a_ij|, max|f|) so near-zero certificates are not amplified
    fscale = 0.0
    for a, b in pairs:
        fv = kernel(radii[a], radii[b], fine[~kernel.is_singular(radii[a], radii[b], fine)])
        fv = np.abs(np.asarray(fv, dtype=float))
        fv = fv[np.isfinite(fv)]
        if fv.size:
            fscale = max(fscale, float(np.max(fv)))
    added = 0
    for rnd in range(refine_rounds + 1):
        rows, rhs = [], []
        for a, b in pairs:
            r, sr = radii[a], radii[b]
            g = nodes[(a, b)]
            mask = ~kernel.is_singular(r, sr, g)
            fv = np.asarray(kernel(r, sr, g[mask]), dtype=float)
            if not np.all(np.isfinite(fv)):
                raise BoundError(f"kernel is not finite on the constraint grid for radii ({r:g}, {sr:g})")
            q = table.evaluate_all(g[mask], upto=jmax)
            rows.append(np.array([(r * sr) ** i * q[j] for i, j in terms]).T)
            rhs.append(fv)
        A = np.vstack(rows)
        bvec = np.concatenate(rhs)
        colscale = np.maximum(np.max(np.abs(A), axis=0), 1e-300)
        A = A / colscale
        rowscale = np.maximum(np.max(np.abs(A), axis=1), 1e-300)
        out = solve(LinearProgram(c / colscale, A / rowscale[:, None], bvec / rowscale, free))
        if not out.optimal:
            raise BoundError(f"energy LP ended with status {out.status}: {out.message}")
        coef = np.zeros((imax + 1, jmax + 1))
        for (i, j), v in zip(terms, out.x / colscale):
            coef[i, j] = v
        cert = Certificate(d, coef, "energy")

        raw = 0.0
        new_nodes = {}
        ref = max(cert.scale(), fscale)
        for a, b in pairs:
            r, sr = radii[a], radii[b]
            mask = ~kernel.is_singular(r, sr, fine)
            gap = cert.h(r, sr, fine[mask]) - kernel(r, sr, fine[mask])
            if gap.size:
                def gap_at(x, r=r, sr=sr):
                    x = np.clip(x, -1.0, 1.0)
                    out = np.full(x.shape, -np.inf)
                    ok = ~kernel.is_singular(r, sr, x)
                    out[ok] = cert.h(r, sr, x[ok]) - kernel(r, sr, x[ok])
                    return out
                sup, xs = _local_sup(gap_at, fine[mask], gap, tol * ref)
                raw = max(raw, sup)
                new_nodes[(a, b)] = np.union1d(_peaks(fine[mask], gap, tol * ref), xs[:8])
        if raw <= tol * ref or rnd == refine_rounds:
            break
        # exchange step: the worst points between nodes become constraints
        for pq, extra_t in new_nodes.items():
            if len(extra_t):
                nodes[pq] = np.union1d(nodes[pq], extra_t)
                added += len(extra_t)
    bound = energy_objective(cert, X)
    residual = raw / ref
    # shifting a_00 down by the raw residual gives a certificate feasible on the fine grid
    pair_weight = s[0] ** 2 - diag[0]
    shells = X.shells()
    return BoundReport(
        kind="energy",
        bound=bound,
        certificate=cert,
        residual=residual,
        raw_residual=raw,
        grid_n=grid_n,
        verify_n=verify_n,
        radii=list(map(float, radii)),
        counts=[sh.count for sh in shells],
        shell_weights=[sh.total_weight for sh in shells],
        valid=residual <= 10 * tol,
        certified_bound=bound - raw * pair_weight,
        lp_status=out.status,
        extra={"kernel": kernel.spec(), "imax": imax, "jmax": jmax, "exponents": exponents, "added_nodes": added},
    )


def sidelnikov_certificate(d: int, l: int) -> Certificate:
    """Exact certificate reproducing ``(rs)^l t^l``: ``a[l, j] = A_{l, l-j}``."""
    if l < 0:
        raise ValueError("l must be >= 0")
    exp = monomial_expansion(d, l).coefficients
    table = np.full((l + 1, l + 1), Fraction(0), dtype=object)
    for j in range(l + 1):
        table[l, j] = exp[l - j]
    return Certificate(d, table, "energy")


# ---------------------------------------------------------------- a-codes


@dataclass(frozen=True)
class ZMatrix:
    """Cosine caps ``z_rs = (r^2 + s^2 - a^2) / (2 r s)`` between shells.

    ``values`` is clamped to [-1, 1].  ``unconstrained`` marks ``z_rs >= 1``
    (every angle is allowed); ``empty`` marks ``z_rs < -1`` (no pair fits).
    """

    raw: np.ndarray
    values: np.ndarray
    unconstrained: np.ndarray
    empty: np.ndarray


def z_matrix(radii, a: float) -> ZMatrix:
    r = np.asarray(radii, dtype=float).reshape(-1)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    if a <= 0:
        raise ValueError("minimum distance a must be positive")
    raw = (r[:, None] ** 2 + r[None, :] ** 2 - a * a) / (2 * r[:, None] * r[None, :])
    return ZMatrix(raw, np.clip(raw, -1.0, 1.0), raw >= 1.0, raw < -1.0)


def _code_intervals(radii, a):
    z = z_matrix(radii, a)
    out = []
    for p, q in _shell_pairs(radii):
        if z.empty[p, q]:
            continue
        out.append((p, q, -1.0, float(z.values[p, q])))
    return out, z


def _worst_code_violation(cert: Certificate, radii, a, grid_n):
    intervals, _ = _code_intervals(radii, a)
    worst, where = -math.inf, (math.nan, math.nan, math.nan)
    for p, q, lo, hi in intervals:
        val, t = _poly_max(cert.d, cert.t_coefficients(radii[p], radii[q]), lo, hi, grid_n)
        if val > worst:
            worst, where = val, (float(radii[p]), float(radii[q]), t)
    return worst, where


@dataclass(frozen=True)
class Verdict:
    verdict: str
    lhs: float
    rhs: float
    worst_violation: float
    worst_at: tuple

    @property
    def excluded(self) -> bool:
        return self.verdict == EXCLUDED


def _code_sides(cert: Certificate, radii, counts):
    a = cert.as_float()
    radii = np.asarray(radii, dtype=float)
    n = np.asarray(counts, dtype=float)
    lhs = sum(a[i, 0] * float(np.sum(radii**i * n)) ** 2 for i in range(cert.imax + 1))
    rhs = float(sum(cert.h(r, r, 1.0) * nk for r, nk in zip(radii, n)))
    return lhs, rhs


def code_bound_check(radii, counts, a: float, cert: Certificate, grid_n: int = DEFAULT_GRID) -> Verdict:
    """Decide whether an ``a``-code with the given shell counts is ruled out.

    Verifies ``h(r, s, t) <= 0`` for ``t`` in ``[-1, z_rs]`` on every pair of
    shells, then compares both sides of the quadratic count inequality.
    """
    radii = [float(r) for r in radii]
    counts = list(counts)
    if len(radii) != len(counts):
        raise ValueError("need one count per radius")
    if any(n < 0 for n in counts):
        raise ValueError("counts must be non-negative")
    if cert.pattern != "code":
        raise ValueError(f"code bound needs a code-pattern certificate, got {cert.pattern!r}")
    bad = cert.sign_violations()
    if bad:
        raise CertificateInfeasible(f"coefficients {bad} break the code sign pattern", (math.nan,) * 3, math.nan)
    worst, where = _worst_code_violation(cert, radii, a, grid_n)
    norm = worst / cert.scale()
    if norm > FEAS_TOL:
        raise CertificateInfeasible(
            f"h = {worst:.3e} > 0 at (r, s, t) = ({where[0]:g}, {where[1]:g}, {where[2]:.6g})", where, worst
        )
    lhs, rhs = _code_sides(cert, radii, counts)
    verdict = EXCLUDED if lhs > rhs + VERDICT_TOL * abs(rhs) else INCONCLUSIVE
    return Verdict(verdict, lhs, rhs, norm, where)


def _code_lp(radii, a, d, imax, jmax, grid_n, counts, extra_nodes=None):
    """Minimize ``sum n_k h(r_k, r_k, 1)`` with ``sum_i a_i0 (sum r^i n)^2 = 1``.

    ``extra_nodes`` maps a shell pair to additional constraint nodes.
    """
    radii = np.asarray(radii, dtype=float)
    n = np.asarray(counts, dtype=float)
    terms = [(i, j) for i in range(imax + 1) for j in range(jmax + 1)]
    table = gegenbauer_table(d, max(jmax, 1))
    q1 = np.array([harm_dim(d, j) for j in range(jmax + 1)], dtype=float)
    intervals, _ = _code_intervals(radii, a)
    rows = []
    for p, q, lo, hi in intervals:
        g = chebyshev_grid(grid_n, lo, hi)
        if extra_nodes and (p, q) in extra_nodes:
            g = np.union1d(g, extra_nodes[(p, q)])
        qv = table.evaluate_all(g, upto=jmax)
        rows.append(np.array([(radii[p] * radii[q]) ** i * qv[j] for i, j in terms]).T)
    norm_row = np.array([float(np.sum(radii**i * n)) ** 2 if j == 0 else 0.0 for i, j in terms])
    A = np.vstack(rows + [norm_row[None, :], -norm_row[None, :]]) if rows else np.vstack([norm_row, -norm_row])
    b = np.zeros(len(A))
    b[-2], b[-1] = 1.0, -1.0
    cost = np.array([float(np.sum(n * radii ** (2 * i))) * q1[j] for i, j in terms])
    colscale = np.maximum(np.max(np.abs(A), axis=0), 1e-300)
    A = A / colscale
    rowscale = np.maximum(np.max(np.abs(A), axis=1), 1e-300)
    out = solve(LinearProgram(-cost / colscale, A / rowscale[:, None], b / rowscale))
    coef = None
    if out.x is not None:
        coef = np.zeros((imax + 1, jmax + 1))
        for (i, j), v in zip(terms, out.x / colscale):
            coef[i, j] = max(v, 0.0)
    return out, coef


def _repair_code(cert: Certificate, radii, a, grid_n) -> tuple[Certificate, float]:
    """Lower ``a_00`` by the worst positive value of ``h`` on the allowed region."""
    worst, _ = _worst_code_violation(cert, radii, a, grid_n)
    shift = max(worst, 0.0)
    if shift == 0.0:
        return cert, 0.0
    # a little extra so rounding in the shifted evaluation cannot push h above zero
    shift *= 1 + 1e-9
    shift += 1e-15 * cert.scale()
    coef = cert.as_float().copy()
    if coef[0, 0] < shift:
        raise BoundError("certificate cannot be repaired without breaking the code sign pattern")
    coef[0, 0] -= shift
    return Certificate(cert.d, coef, "code"), shift


def code_bound_optimize(
    radii,
    a: float,
    d: int,
    imax: int = 0,
    jmax: int = 16,
    grid_n: int = DEFAULT_GRID,
    simplex_resolution: int = 8,
    n_cap: int = 100000,
    jobs: int = 1,
    refine_rounds: int = 16,
) -> BoundReport:
    """Upper bound on the size of an ``a``-code lying on spheres of the given radii.

    One radius: a single LP minimizing ``h(r, r, 1)`` under
    ``sum_i a_i0 r^(2i) = 1``, giving ``|X| <= h(r, r, 1)``; the optimal
    certificate is then repaired so it is nonpositive on the whole allowed
    interval, and the repaired bound is reported as ``certified_bound``.
    Violations found between grid nodes trigger up to ``refine_rounds``
    exchange steps, as in :func:`energy_lower_bound`.

    Several radii: the count inequality is quadratic in the shell counts, so
    the total is bisected and each candidate total is tested on a grid of the
    count simplex.  The result is marked heuristic.
    """
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("need at least one radius")
    if len({round(r, 12) for r in radii}) != len(radii):
        raise ValueError("radii must be distinct")
    zm = z_matrix(radii, a)
    if np.any(np.diag(zm.unconstrained)):
        raise BoundError("a is too small to restrict points on a shell; no finite bound")
    extra = {
        "a": a,
        "d": d,
        "imax": imax,
        "jmax": jmax,
        "z": zm.raw.tolist(),
        "unconstrained_pairs": [[int(p), int(q)] for p, q in zip(*np.nonzero(zm.unconstrained))],
    }
    if len(radii) == 1:
        verify_n = DEFAULT_VERIFY_FACTOR * (grid_n - 1) + 1
        extra_nodes: dict = {}
        added = 0
        for rnd in range(refine_rounds + 1):
            out, coef = _code_lp(radii, a, d, imax, jmax, grid_n, [1.0], extra_nodes)
            if out.status == "infeasible":
                raise BoundError(
                    f"no code certificate of degree <= {jmax} is nonpositive on the allowed range; raise jmax"
                )
            if not out.optimal:
                raise BoundError(f"code LP ended with status {out.status}: {out.message}")
            cert = Certificate(d, coef, "code")
            raw_worst, where = _worst_code_violation(cert, radii, a, verify_n)
            if raw_worst <= FEAS_TOL * cert.scale() or rnd == refine_rounds:
                break
            # exchange step on the single pair (0, 0)
            lo, hi = -1.0, float(zm.values[0, 0])
            fine = chebyshev_grid(verify_n, lo, hi)
            peaks = _peaks(fine, cert.h(radii[0], radii[0], fine), FEAS_TOL * cert.scale())
            peaks = np.union1d(peaks, [where[2]])
            extra_nodes[(0, 0)] = np.union1d(extra_nodes.get((0, 0), np.empty(0)), peaks)
            added += len(peaks)
        extra["added_nodes"] = added
        bound = float(cert.h(radii[0], radii[0], 1.0))
        fixed, shift = _repair_code(cert, radii, a, verify_n)
        lhs0 = sum(fixed.as_float()[i, 0] * radii[0] ** (2 * i) for i in range(imax + 1))
        certified = float(fixed.h(radii[0], radii[0], 1.0)) / lhs0
        residual = max(raw_worst, 0.0) / cert.scale()
        return BoundReport(
            kind="code",
            bound=bound,
            certificate=cert,
            residual=residual,
            raw_residual=max(raw_worst, 0.0),
            grid_n=grid_n,
            verify_n=DEFAULT_VERIFY_FACTOR * (grid_n - 1) + 1,
            radii=radii,
            counts=[],
            shell_weights=[1.0],
            valid=residual <= 10 * FEAS_TOL,
            certified_bound=certified,
            certified_certificate=fixed,
            lp_status=out.status,
            extra=extra,
        )
    return _code_bound_multishell(radii, a, d, imax, jmax, grid_n, simplex_resolution, n_cap, jobs, extra)


def _simplex_points(p: int, res: int):
    def rec(k, left):
        if k == p - 1:
            yield (left,)
            return
        for v in range(left + 1):
            for tail in rec(k + 1, left - v):
                yield (v,) + tail

    return [np.array(c, dtype=float) / res for c in rec(0, res)]


def _excluded_counts(args) -> bool:
    radii, a, d, imax, jmax, grid_n, counts = args
    out, _ = _code_lp(radii, a, d, imax, jmax, grid_n, counts)
    if not out.optimal:
        return False
    return -out.objective < 1.0 - VERDICT_TOL


def _code_bound_multishell(radii, a, d, imax, jmax, grid_n, res, n_cap, jobs, extra) -> BoundReport:
    # each shell is an a-code on its own sphere, so the per-shell bounds add up to a rigorous bound
    per_shell = []
    for r in radii:
        rep = code_bound_optimize([r], a, d, 0, jmax, grid_n)
        per_shell.append(math.floor(rep.certified_bound + VERDICT_TOL))
    decoupled = int(sum(per_shell))
    extra = dict(extra, per_shell_bounds=per_shell, decoupled_bound=decoupled, simplex_resolution=res)
    joint = None
    # a pair of shells with z_rs >= 1 forces every code-pattern certificate to vanish
    if not extra["unconstrained_pairs"]:
        joint = _joint_bisection(radii, a, d, imax, jmax, grid_n, res, min(n_cap, decoupled + 1), jobs)
    heuristic = joint is not None and joint < decoupled
    bound = float(joint if heuristic else decoupled)
    extra["joint_bound"] = joint
    return BoundReport(
        kind="code",
        bound=bound,
        certificate=None,
        residual=0.0,
        raw_residual=0.0,
        grid_n=grid_n,
        verify_n=DEFAULT_VERIFY_FACTOR * (grid_n - 1) + 1,
        radii=radii,
        counts=[],
        shell_weights=[1.0] * len(radii),
        valid=True,
        certified_bound=float(decoupled),
        heuristic=heuristic,
        extra=extra,
    )


def _joint_bisection(radii, a, d, imax, jmax, grid_n, res, n_top, jobs):
    """Smallest total count whose whole count simplex is excluded, minus one; None if none up to ``n_top``."""
    fractions = _simplex_points(len(radii), res)
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None

    def all_excluded(total: int) -> bool:
        args = [(radii, a, d, imax, jmax, grid_n, total * f) for f in fractions]
        results = executor.map(_excluded_counts, args) if executor else map(_excluded_counts, args)
        return all(results)

    try:
        if not all_excluded(n_top):
            return None
        lo, hi = 0, n_top
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if all_excluded(mid):
                hi = mid
            else:
                lo = mid
    finally:
        if executor:
            executor.shutdown()
    return lo


# ---------------------------------------------------------------- Euclidean designs


def fisher_design_certificate(d: int, t: int) -> Certificate:
    """Exact design certificate ``f = (sum_{k <= e} Q_k)^2``, ``e = t // 2``.

    Each ``Q_j`` term sits at radial exponent ``j``.  On one shell the design
    check with this certificate reproduces the spherical Fisher bound for
    ``t = 2e``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    e = t // 2
    base = gegenbauer_to_power_exact(d, [1] * (e + 1))
    square = [Fraction(0)] * (2 * e + 1)
    for i, u in enumerate(base):
        for j, v in enumerate(base):
            square[i + j] += u * v
    return design_certificate_from_t_poly(d, t, square)


def design_certificate_from_t_poly(d: int, t: int, power_coeffs) -> Certificate:
    """Certificate with ``f(r, s, t) = sum_j g_j (rs)^j Q_j(t)`` for ``sum_k c_k t^k = sum_j g_j Q_j``."""
    g = power_to_gegenbauer_exact(d, power_coeffs)
    deg = len(g) - 1
    table = np.full((deg + 1, deg + 1), Fraction(0), dtype=object)
    for j, v in enumerate(g):
        table[j, j] = v
    return Certificate(d, table, "design", t)


def design_bound_check(
    radii,
    weights,
    counts,
    t: int,
    cert: Certificate,
    grid_n: int = DEFAULT_GRID,
    pair_counts=None,
) -> Verdict:
    """Decide whether a Euclidean t-design with these shell counts and weights is ruled out.

    ``weights`` gives the constant weight on each shell.  Without
    ``pair_counts`` only the diagonal pairs are counted (``d_rr1 >= n_r``,
    ``d_rs1 >= 0``); a full matrix of same-direction pair counts may be given.
    """
    radii = [float(r) for r in radii]
    weights = [float(w) for w in weights]
    counts = list(counts)
    if not (len(radii) == len(weights) == len(counts)):
        raise ValueError("radii, weights and counts must have equal length")
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    if cert.pattern != "design":
        raise ValueError(f"design bound needs a design-pattern certificate, got {cert.pattern!r}")
    if cert.t != t:
        cert = Certificate(cert.d, cert.coeffs, "design", t)
    bad = cert.sign_violations()
    if bad:
        raise CertificateInfeasible(f"coefficients {bad} must be <= 0 outside I({t})", (math.nan,) * 3, math.nan)
    worst, where = -math.inf, (math.nan,) * 3
    for p, q in _shell_pairs(radii):
        val, tt = _poly_max(cert.d, -cert.t_coefficients(radii[p], radii[q]), -1.0, 1.0, grid_n)
        if val > worst:
            worst, where = val, (radii[p], radii[q], tt)
    norm = worst / cert.scale()
    if norm > FEAS_TOL:
        raise CertificateInfeasible(
            f"f = {-worst:.3e} < 0 at (r, s, t) = ({where[0]:g}, {where[1]:g}, {where[2]:.6g})", where, -worst
        )
    a = cert.as_float()
    r = np.asarray(radii)
    w = np.asarray(weights)
    n = np.asarray(counts, dtype=float)
    lhs = sum(a[i, 0] * float(np.sum(w * r**i * n)) ** 2 for i in range(cert.imax + 1))
    if pair_counts is None:
        rhs = float(sum(wk * wk * cert.h(rk, rk, 1.0) * nk for rk, wk, nk in zip(r, w, n)))
    else:
        dm = np.asarray(pair_counts, dtype=float)
        rhs = float(sum(w[p] * w[q] * cert.h(r[p], r[q], 1.0) * dm[p, q] for p in range(len(r)) for q in range(len(r))))
    verdict = EXCLUDED if lhs < rhs - VERDICT_TOL * abs(rhs) else INCONCLUSIVE
    return Verdict(verdict, lhs, rhs, max(norm, 0.0), where)


def design_bound_check_configuration(X: Configuration, t: int, cert: Certificate, grid_n: int = DEFAULT_GRID,
                                     use_pair_counts: bool = False) -> Verdict:
    if not X.weights_constant_per_shell():
        raise ValueError("design bound needs weights constant on each shell")
    shells = X.shells()
    weights = [sh.total_weight / sh.count for sh in shells]
    pair_counts = None
    if use_pair_counts:
        u = X.unit_points
        same = (u @ u.T) >= 1 - 1e-12
        p = len(shells)
        pair_counts = np.zeros((p, p))
        for x, y in zip(*np.nonzero(same)):
            pair_counts[X.shell_of[x], X.shell_of[y]] += 1
    return design_bound_check(X.radii, weights, [sh.count for sh in shells], t, cert, grid_n, pair_counts)


# ---------------------------------------------------------------- closed forms


def fisher_spherical(d: int, t: int) -> int:
    """Lower bound on the size of a spherical t-design on ``S^{d-1}``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    e, odd = divmod(t, 2)
    if odd:
        return 2 * comb(d + e - 1, e)
    return comb(d + e - 1, e) + (comb(d + e - 2, e - 1) if e >= 1 else 0)


def fisher_strong(d: int, t: int, antipodal: bool = False) -> int:
    """Lower bound for strong Euclidean t-designs on at least ``t // 2 + 1`` spheres."""
    if t < 0:
        raise ValueError("t must be >= 0")
    e, odd = divmod(t, 2)
    if odd and not antipodal:
        raise ValueError("odd t needs an antipodal design")
    if odd:
        return 2 * (e + 1) * comb(d + e - 1, e)
    return (e + 1) * fisher_spherical(d, 2 * e)


def fisher_per_sphere(d: int, t: int, p: int) -> int:
    """Lower bound for a strong t-design on ``p <= t + 1`` spheres with shellwise constant weights."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if t + 1 < p:
        raise ValueError(f"needs t + 1 >= p, got t={t}, p={p}")
    return p * fisher_spherical(d, t)
