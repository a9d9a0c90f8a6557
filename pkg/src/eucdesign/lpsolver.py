"""Dense two-phase simplex (tableau form, Bland's rule).

Solves ``maximize c.a  subject to  A a <= b`` where each variable is either
non-negative or free.  Sized for the few-hundred-variable, few-thousand-row
problems built by :mod:`eucdesign.bounds`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["LinearProgram", "LPOutcome", "solve", "OPTIMAL", "UNBOUNDED", "INFEASIBLE", "NUMERICAL_FAILURE"]

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"

MAX_ROWS = 5000
MAX_VARS = 500

_PIVOT_TOL = 1e-9
_BREAKDOWN_TOL = 1e-11
_COST_TOL = 1e-10
_FEAS_TOL = 1e-7
_STALL_LIMIT = 50


@dataclass(frozen=True)
class LinearProgram:
    """``maximize c.a`` s.t. ``A a <= b``; ``free[k]`` marks variables unbounded below."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    free: np.ndarray = field(default=None)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.ndim == 1 and A.size == 0:
            A = A.reshape(0, len(c))
        if A.ndim != 2 or A.shape != (len(b), len(c)):
            raise ValueError(f"inconsistent LP shapes: A {A.shape}, b {b.shape}, c {c.shape}")
        free = np.zeros(len(c), dtype=bool) if self.free is None else np.asarray(self.free, dtype=bool).reshape(-1)
        if len(free) != len(c):
            raise ValueError("free mask length differs from number of variables")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"LP data {name} has non-finite entries")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "free", free)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def violation(self, a) -> float:
        """Largest row violation of ``A a <= b`` relative to ``1 + |b|``, and of the sign bounds."""
        a = np.asarray(a, dtype=float)
        viol = 0.0
        if len(self.b):
            viol = float(np.max((self.A @ a - self.b) / (1.0 + np.abs(self.b))))
        neg = a[~self.free]
        if neg.size:
            viol = max(viol, float(-neg.min()))
        return max(viol, 0.0)


@dataclass(frozen=True)
class LPOutcome:
    status: str
    x: np.ndarray | None
    objective: float
    max_violation: float
    iterations: int = 0
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Breakdown(Exception):
    pass


class _Tableau:
    """Rows ``0..m-1`` are constraints, the last row holds reduced costs."""

    def __init__(self, T: np.ndarray, basis: np.ndarray):
        self.T = T
        self.basis = basis
        self.iterations = 0

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        piv = T[r, j]
        if abs(piv) < _BREAKDOWN_TOL:
            raise _Breakdown(f"pivot {piv:.3e} below breakdown threshold")
        T[r] /= piv
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: int, max_iter: int) -> str:
        """Pivot over columns ``< allowed`` until optimal or unbounded; returns a status.

        Entering columns follow the steepest reduced cost while the objective
        keeps improving.  After ``_STALL_LIMIT`` degenerate pivots in a row the
        phase switches to Bland's rule for good, which cannot cycle.
        """
        T = self.T
        m = T.shape[0] - 1
        bland = False
        stall = 0
        for _ in range(max_iter):
            cost = T[-1, :allowed]
            cands = np.flatnonzero(cost < -_COST_TOL)
            if not len(cands):
                return OPTIMAL
            j = int(cands[0]) if bland else int(cands[np.argmin(cost[cands])])
            col = T[:m, j]
            pos = col > _PIVOT_TOL
            if not pos.any():
                if np.any(col > _BREAKDOWN_TOL * 1e-3):
                    raise _Breakdown("ray test ambiguous: only tiny positive column entries")
                return UNBOUNDED
            rhs = np.maximum(T[:m, -1], 0.0)
            ratios = np.full(m, np.inf)
            ratios[pos] = rhs[pos] / col[pos]
            best = ratios.min()
            tied = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
            if bland:
                r = int(tied[np.argmin(self.basis[tied])])
            else:
                # among ties prefer the largest pivot for stability
                r = int(tied[np.argmax(col[tied])])
            if best * -cost[j] <= 1e-14 * max(1.0, abs(T[-1, -1])):
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
            else:
                stall = 0
            self.pivot(r, j)
        raise _Breakdown(f"iteration limit {max_iter} reached")


def _two_phase(A, b, c, max_iter):
    """Run both phases on ``max c.x, A x <= b, x >= 0``; returns ``(status, tableau, message)``."""
    m, ns = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    art_rows = np.flatnonzero(sign < 0)
    k = len(art_rows)
    ncol = ns + m + k
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :ns] = A * sign[:, None]
    T[:m, ns : ns + m] = np.diag(sign)
    T[:m, -1] = b * sign
    basis = np.arange(ns, ns + m)
    for a, row in enumerate(art_rows):
        T[row, ns + m + a] = 1.0
        basis[row] = ns + m + a
    tab = _Tableau(T, basis)
    if max_iter is None:
        max_iter = 50 * (m + ncol) + 1000
    try:
        if k:
            # phase 1: maximize -(sum of artificials)
            T[-1, :] = 0.0
            T[-1, ns + m : ncol] = 1.0
            for row in art_rows:
                T[-1] -= T[row]
            status = tab.run(ncol, max_iter)
            if status != OPTIMAL:
                raise _Breakdown("phase 1 did not terminate optimally")
            infeas = -T[-1, -1]
            if infeas > _FEAS_TOL * (1.0 + np.max(np.abs(b))):
                return INFEASIBLE, tab, f"phase 1 residual {infeas:.3e}"
            _expel_artificials(tab, ns + m)
            T = tab.T = np.delete(tab.T, np.s_[ns + m : ncol], axis=1)
        # phase 2
        T[-1, :] = 0.0
        T[-1, :ns] = -c
        for r, j in enumerate(tab.basis):
            if T[-1, j] != 0.0:
                T[-1] -= T[-1, j] * T[r]
        status = tab.run(ns + m, max_iter)
    except _Breakdown as exc:
        return NUMERICAL_FAILURE, tab, str(exc)
    return status, tab, ""


def _basic_solution(tab, ns):
    xs = np.zeros(tab.T.shape[1] - 1)
    rows = tab.T.shape[0] - 1
    xs[tab.basis[:rows]] = tab.T[:rows, -1]
    return xs[:ns]


def _primal(lp: LinearProgram, max_iter):
    free_idx = np.flatnonzero(lp.free)
    # structural columns: original vars, then negative parts of free vars
    A = np.hstack([lp.A, -lp.A[:, free_idx]])
    c = np.concatenate([lp.c, -lp.c[free_idx]])
    ns = A.shape[1]
    status, tab, msg = _two_phase(A, lp.b, c, max_iter)
    if status != OPTIMAL:
        return status, None, tab.iterations, msg
    rows = tab.T.shape[0] - 1
    x = _refine_vertex(A, lp.b, tab.basis[:rows], ns, _basic_solution(tab, ns))
    sol = x[: len(lp.c)].copy()
    sol[free_idx] -= x[len(lp.c) :]
    return OPTIMAL, sol, tab.iterations, ""


def _via_dual(lp: LinearProgram, max_iter):
    """Solve the dual ``min b.y, A^T y >= c (= on free columns), y >= 0`` and read off prices."""
    m, n = lp.shape
    free = lp.free
    blocks, rhs, owner, sgn = [], [], [], []
    for k in range(n):
        blocks.append(-lp.A[:, k])
        rhs.append(-lp.c[k])
        owner.append(k)
        sgn.append(1.0)
        if free[k]:
            blocks.append(lp.A[:, k])
            rhs.append(lp.c[k])
            owner.append(k)
            sgn.append(-1.0)
    AD = np.array(blocks)
    status, tab, msg = _two_phase(AD, np.array(rhs), -lp.b, max_iter)
    if status != OPTIMAL:
        return status, None, tab.iterations, msg
    prices = tab.T[-1, m : m + len(rhs)]
    x = np.zeros(n)
    for price, k, sg in zip(prices, owner, sgn):
        x[k] += sg * price
    x[~free] = np.maximum(x[~free], 0.0)
    # polish on the rows whose dual variable is basic (complementary slackness)
    rows = tab.T.shape[0] - 1
    tight = np.sort(tab.basis[:rows][tab.basis[:rows] < m])
    active = np.flatnonzero(free | (np.abs(x) > 1e-13 * max(1.0, np.max(np.abs(x)))))
    if len(tight) and len(active) and len(tight) >= len(active):
        sub = lp.A[np.ix_(tight, active)]
        try:
            xa = np.linalg.lstsq(sub, lp.b[tight], rcond=None)[0]
        except np.linalg.LinAlgError:
            xa = None
        if xa is not None:
            cand = np.zeros(n)
            cand[active] = xa
            if lp.violation(cand) <= lp.violation(x):
                x = cand
    return OPTIMAL, x, tab.iterations, ""


def solve(lp: LinearProgram, max_iter: int | None = None, method: str = "auto") -> LPOutcome:
    """Solve ``lp`` by the two-phase simplex method with Bland's anti-cycling rule.

    Free variables are split into positive and negative parts.  With
    ``method="auto"`` a tall problem (many more rows than variables) is solved
    through its dual, whose tableau has one row per variable (``"dual"``
    forces this).  The primal route is the fallback whenever the dual does
    not end in a verified optimum or a certificate of primal infeasibility.
    A pivot below ``1e-11`` or a final point violating the constraints yields
    status ``numerical_failure`` instead of a wrong optimum.
    """
    m, n = lp.shape
    if m > MAX_ROWS or n > MAX_VARS:
        raise ValueError(f"LP of size {m}x{n} exceeds the supported {MAX_ROWS}x{MAX_VARS}")
    if method not in ("auto", "primal", "dual"):
        raise ValueError(f"unknown method {method!r}")
    iterations = 0
    if method == "dual" or (method == "auto" and m > 2 * n):
        status, x, iterations, msg = _via_dual(lp, max_iter)
        if status == OPTIMAL and lp.violation(x) <= _FEAS_TOL:
            return LPOutcome(OPTIMAL, x, float(lp.c @ x), lp.violation(x), iterations, "dual route")
        if status == UNBOUNDED:
            # weak duality: an unbounded dual leaves no feasible primal point
            return LPOutcome(INFEASIBLE, None, float("nan"), float("nan"), iterations, "dual unbounded")
    status, x, it2, msg = _primal(lp, max_iter)
    iterations += it2
    if status != OPTIMAL:
        return LPOutcome(status, None, float("nan"), float("nan"), iterations, msg)
    viol = lp.violation(x)
    if viol > _FEAS_TOL:
        return LPOutcome(NUMERICAL_FAILURE, x, float(lp.c @ x), viol, iterations, "final point violates constraints")
    return LPOutcome(OPTIMAL, x, float(lp.c @ x), viol, iterations, "")


def _refine_vertex(A, b, basis, ns, x_tab):
    """Recompute the basic solution from the original rows.

    Rows whose slack is nonbasic are tight, so the basic structural values
    solve a square system of that size; this removes drift accumulated over
    many tableau updates.
    """
    struct = np.sort(basis[basis < ns])
    if not len(struct):
        return np.zeros(ns)
    basic_slack = np.zeros(A.shape[0], dtype=bool)
    basic_slack[basis[basis >= ns] - ns] = True
    tight = np.flatnonzero(~basic_slack)
    if len(tight) != len(struct):
        return x_tab
    try:
        xb = np.linalg.solve(A[np.ix_(tight, struct)], b[tight])
    except np.linalg.LinAlgError:
        return x_tab
    x = np.zeros(ns)
    x[struct] = xb
    return x


def _expel_artificials(tab: _Tableau, first_art: int) -> None:
    """Pivot basic artificials (at level zero) out of the basis; drop redundant rows."""
    keep = []
    m = tab.T.shape[0] - 1
    for r in range(m):
        if tab.basis[r] < first_art:
            keep.append(r)
            continue
        row = tab.T[r, :first_art]
        cand = np.flatnonzero(np.abs(row) > _PIVOT_TOL)
        if len(cand):
            tab.pivot(r, int(cand[0]))
            keep.append(r)
    if len(keep) < m:
        tab.T = np.vstack([tab.T[keep], tab.T[-1:]])
        tab.basis = tab.basis[keep]
