"""NumPy implementation of the pair-sum kernels (fallback for ``_pairsum``).

Both modules expose the same two functions.  Sums run over ordered pairs in
row-major chunks, so results are deterministic for identical input.
"""
import numpy as np

_CHUNK = 256

RIESZ, POLY_U, POLY_T, INNER_POWER = 0, 1, 2, 3


def pair_moments(unit, radii, weights, alpha, beta, imax, jmax):
    """``M[i, j] = sum_{x,y} w(x) w(y) (|x||y|)^i Q_j(x'.y')`` over all ordered pairs."""
    unit = np.asarray(unit, dtype=float)
    radii = np.asarray(radii, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = len(unit)
    out = np.zeros((imax + 1, jmax + 1))
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        t = np.clip(unit[lo:hi] @ unit.T, -1.0, 1.0)
        ww = weights[lo:hi, None] * weights[None, :]
        rs = radii[lo:hi, None] * radii[None, :]
        radial = np.empty((imax + 1,) + t.shape)
        radial[0] = ww
        for i in range(1, imax + 1):
            radial[i] = radial[i - 1] * rs
        radial = radial.reshape(imax + 1, -1)
        q_prev2 = None
        q_prev = np.ones(t.shape)
        out[:, 0] += radial.sum(axis=1)
        for j in range(1, jmax + 1):
            if j == 1:
                q = alpha[1] * t
            else:
                q = alpha[j] * t * q_prev - beta[j] * q_prev2
            out[:, j] += radial @ q.reshape(-1)
            q_prev2, q_prev = q_prev, q
    return out


def _horner(coeffs, u):
    acc = np.zeros_like(u)
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


def pair_energy(points, unit, weights, mode, params):
    """Sum of ``w(x) w(y) f`` over ordered pairs ``x != y``.

    ``mode`` selects ``f``: Riesz ``|x-y|^(-s)`` (params ``[s]``), polynomial in
    ``u = |x-y|^2``, polynomial in ``t = x'.y'``, or ``(x.y)^l`` (params ``[l]``).
    """
    points = np.asarray(points, dtype=float)
    unit = np.asarray(unit, dtype=float)
    weights = np.asarray(weights, dtype=float)
    params = np.asarray(params, dtype=float)
    n = len(points)
    total = 0.0
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        ww = weights[lo:hi, None] * weights[None, :]
        if mode == RIESZ or mode == POLY_U:
            diff = points[lo:hi, None, :] - points[None, :, :]
            u = np.einsum("ijk,ijk->ij", diff, diff)
            if mode == RIESZ:
                with np.errstate(divide="ignore"):
                    f = u ** (-0.5 * params[0])
            else:
                f = _horner(params, u)
        elif mode == POLY_T:
            f = _horner(params, np.clip(unit[lo:hi] @ unit.T, -1.0, 1.0))
        elif mode == INNER_POWER:
            f = (points[lo:hi] @ points.T) ** int(params[0])
        else:
            raise ValueError(f"unknown energy mode {mode}")
        rows = np.arange(lo, hi)
        f[rows - lo, rows] = 0.0
        total += float(np.sum(ww * f))
    return total
