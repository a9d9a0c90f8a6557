"""Weighted point configurations on concentric spheres."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Configuration",
    "ShellSummary",
    "build_configuration",
    "generate",
    "is_antipodal",
    "union_scale",
    "load_configuration",
    "save_configuration",
    "random_rotation",
    "CATALOG_KINDS",
]

DEFAULT_RADIUS_TOL = 1e-9
_ORIGIN_TOL = 1e-12

CATALOG_KINDS = ("polygon", "cross_polytope", "simplex", "cube", "icosahedron")


@dataclass(frozen=True)
class ShellSummary:
    radius: float
    count: int
    total_weight: float
    constant_weight: bool


@dataclass(frozen=True, eq=False)
class Configuration:
    """Finite weighted point set in R^d, partitioned by radius into shells.

    Build instances with :func:`build_configuration`; the constructor does not
    validate.
    """

    d: int
    points: np.ndarray
    weights: np.ndarray
    norms: np.ndarray
    shell_of: np.ndarray
    radii: np.ndarray
    radius_tolerance: float = DEFAULT_RADIUS_TOL

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_shells(self) -> int:
        return len(self.radii)

    @property
    def unit_points(self) -> np.ndarray:
        return self.points / self.norms[:, None]

    @property
    def shell_index(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.shell_of == k) for k in range(self.n_shells)]

    def shells(self) -> list[ShellSummary]:
        out = []
        for k, idx in enumerate(self.shell_index):
            w = self.weights[idx]
            const = bool(np.all(np.abs(w - w[0]) <= 1e-12 * abs(w[0])))
            out.append(ShellSummary(float(self.radii[k]), len(idx), float(w.sum()), const))
        return out

    def shell_counts(self) -> list[int]:
        return [s.count for s in self.shells()]

    def weights_constant_per_shell(self) -> bool:
        return all(s.constant_weight for s in self.shells())

    def transformed(self, matrix) -> "Configuration":
        m = np.asarray(matrix, dtype=float)
        return build_configuration(self.d, self.points @ m.T, self.weights, self.radius_tolerance)

    def scaled(self, c: float) -> "Configuration":
        return build_configuration(self.d, self.points * c, self.weights, self.radius_tolerance)


def _group_radii(norms: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(norms, kind="stable")
    shell_of = np.empty(len(norms), dtype=np.int64)
    groups: list[list[int]] = []
    for idx in order:
        r = norms[idx]
        if groups and abs(r - norms[groups[-1][0]]) <= tol * max(r, norms[groups[-1][0]]):
            groups[-1].append(idx)
        else:
            groups.append([idx])
    radii = np.empty(len(groups))
    for k, g in enumerate(groups):
        shell_of[g] = k
        radii[k] = float(np.mean(norms[g]))
    return radii, shell_of


def build_configuration(d: int, points, weights=None, radius_tolerance: float = DEFAULT_RADIUS_TOL) -> Configuration:
    """Validate a weighted point set and group it into shells.

    Points whose norms agree within relative ``radius_tolerance`` share a shell.
    Shell radii are sorted ascending.
    """
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    pts = np.array(points, dtype=float)
    if pts.size == 0:
        raise ValueError("configuration is empty")
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValueError(f"points must have shape (n, {d}), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite coordinates")
    n = len(pts)
    if weights is None:
        w = np.ones(n)
    else:
        w = np.array(weights, dtype=float).reshape(-1)
        if len(w) != n:
            raise ValueError(f"got {len(w)} weights for {n} points")
    if not np.all(w > 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and strictly positive")
    norms = np.sqrt(np.einsum("ij,ij->i", pts, pts))
    bad = np.flatnonzero(norms < _ORIGIN_TOL)
    if len(bad):
        raise ValueError(f"point {int(bad[0])} is at the origin")
    radii, shell_of = _group_radii(norms, radius_tolerance)
    for arr in (pts, w, norms, radii, shell_of):
        arr.setflags(write=False)
    return Configuration(d, pts, w, norms, shell_of, radii, radius_tolerance)


def random_rotation(d: int, rng=None) -> np.ndarray:
    """Haar-random orthogonal matrix."""
    rng = np.random.default_rng(rng)
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def _simplex_vertices(d: int) -> np.ndarray:
    # centred standard basis of R^{d+1}, then an orthonormal frame of the hyperplane
    e = np.eye(d + 1) - 1.0 / (d + 1)
    basis = np.linalg.svd(e)[2][:d]
    v = e @ basis.T
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _icosahedron() -> np.ndarray:
    phi = (1 + math.sqrt(5)) / 2
    v = []
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            v.append((0, s1, s2 * phi))
            v.append((s1, s2 * phi, 0))
            v.append((s2 * phi, 0, s1))
    v = np.array(v, dtype=float)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def generate(kind: str, d: int, radius: float = 1.0, rotation=None, n: int | None = None) -> Configuration:
    """Catalog configurations with unit weights on the sphere of the given radius.

    ``kind`` is one of ``polygon`` (d=2, needs ``n``), ``cross_polytope``,
    ``simplex``, ``cube`` or ``icosahedron`` (d=3).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if kind == "polygon":
        if d != 2:
            raise ValueError("polygon requires d=2")
        if n is None or n < 1:
            raise ValueError("polygon requires a vertex count n >= 1")
        ang = 2 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
    elif kind == "cross_polytope":
        eye = np.eye(d)
        pts = np.empty((2 * d, d))
        pts[0::2] = eye
        pts[1::2] = -eye
    elif kind == "simplex":
        pts = _simplex_vertices(d)
    elif kind == "cube":
        grid = np.array(np.meshgrid(*([[-1.0, 1.0]] * d), indexing="ij")).reshape(d, -1).T
        pts = grid / math.sqrt(d)
    elif kind == "icosahedron":
        if d != 3:
            raise ValueError("icosahedron requires d=3")
        pts = _icosahedron()
    else:
        raise ValueError(f"unknown catalog kind {kind!r}")
    pts = pts * radius
    if rotation is not None:
        rot = np.asarray(rotation, dtype=float)
        if rot.shape != (d, d) or not np.allclose(rot @ rot.T, np.eye(d), atol=1e-10):
            raise ValueError("rotation must be a d x d orthogonal matrix")
        pts = pts @ rot.T
    return build_configuration(d, pts)


def is_antipodal(X: Configuration) -> bool:
    """True iff ``X = -X`` with ``w(x) = w(-x)``."""
    pts = X.points
    used = np.zeros(len(pts), dtype=bool)
    for k, x in enumerate(pts):
        tol = 1e-9 * X.norms[k]
        dist = np.max(np.abs(pts + x), axis=1)
        cand = np.flatnonzero(dist <= tol)
        if not any(abs(X.weights[c] - X.weights[k]) <= 1e-12 * X.weights[k] for c in cand):
            return False
        used[cand] = True
    return bool(used.all())


def union_scale(X: Configuration, scales, per_shell_weights=None, rotations=None) -> Configuration:
    """Disjoint union of the copies ``scales[k] * X`` with constant weights.

    ``rotations`` optionally applies an orthogonal matrix to each copy.
    """
    scales = [float(s) for s in scales]
    if not scales or any(s <= 0 for s in scales):
        raise ValueError("scales must be positive")
    weights = [1.0] * len(scales) if per_shell_weights is None else [float(w) for w in per_shell_weights]
    if len(weights) != len(scales):
        raise ValueError("need one weight per scale")
    tol = X.radius_tolerance
    srt = sorted(scales)
    for a, b in zip(srt, srt[1:]):
        if b - a <= tol * b:
            raise ValueError(f"scales {a!r} and {b!r} collide within tolerance")
    pts, ws = [], []
    for k, (s, w) in enumerate(zip(scales, weights)):
        p = X.points * s
        if rotations is not None and rotations[k] is not None:
            p = p @ np.asarray(rotations[k], dtype=float).T
        pts.append(p)
        ws.append(np.full(len(p), w))
    return build_configuration(X.d, np.vstack(pts), np.concatenate(ws), tol)


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def config_to_dict(X: Configuration) -> dict:
    return {
        "dimension": X.d,
        "points": [[float(v) for v in p] for p in X.points],
        "weights": [float(w) for w in X.weights],
        "radius_tolerance": X.radius_tolerance,
    }


def config_from_dict(doc: dict) -> Configuration:
    try:
        d = int(doc["dimension"])
        pts = doc["points"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed configuration document: {exc}") from None
    return build_configuration(d, pts, doc.get("weights"), float(doc.get("radius_tolerance", DEFAULT_RADIUS_TOL)))


def save_configuration(X: Configuration, path, fmt: str | None = None) -> None:
    """Write JSON (default) or CSV; floats round-trip exactly (17 significant digits)."""
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    path.write_text(dumps_configuration(X, fmt))


def dumps_configuration(X: Configuration, fmt: str = "json") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{k + 1}" for k in range(X.d)] + ["w"])
        for p, w in zip(X.points, X.weights):
            writer.writerow([f"{v:.17g}" for v in p] + [f"{w:.17g}"])
        return buf.getvalue()
    if fmt != "json":
        raise ValueError(f"unknown configuration format {fmt!r}")
    # json uses repr for floats, which is the shortest exact round-trip form; one point per line
    doc = config_to_dict(X)
    rows = [json.dumps([v + 0.0 for v in p]) for p in doc["points"]]
    lines = [f'  {r},' for r in rows]
    if lines:
        lines[-1] = lines[-1][:-1]
    head = {k: v for k, v in doc.items() if k != "points"}
    body = ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in head.items())
    return "{\n" + body + ',\n "points": [\n' + "\n".join(lines) + "\n ]\n}\n"


def loads_configuration(text: str, fmt: str = "json", radius_tolerance: float = DEFAULT_RADIUS_TOL) -> Configuration:
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed configuration file: {exc}") from None
        if not isinstance(doc, dict):
            raise ValueError("configuration document must be an object")
        return config_from_dict(doc)
    if fmt != "csv":
        raise ValueError(f"unknown configuration format {fmt!r}")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError("empty CSV configuration")
    header = [c.strip().lower() for c in rows[0]]
    has_header = any(c and not _is_number(c) for c in header)
    if has_header:
        rows = rows[1:]
        weighted = header[-1] in ("w", "weight")
        d = len(header) - (1 if weighted else 0)
    else:
        weighted = None
        d = None
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise ValueError(f"malformed CSV configuration: {exc}") from None
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise ValueError("CSV rows have inconsistent column counts")
    width = widths.pop()
    if d is None:
        # without a header, a trailing column is only read as weights when asked via dimension
        d = width
        weighted = False
    if width != d + (1 if weighted else 0):
        raise ValueError("CSV column count does not match header")
    arr = np.array(data)
    pts = arr[:, :d]
    w = arr[:, d] if weighted else None
    return build_configuration(d, pts, w, radius_tolerance)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_configuration(path, fmt: str | None = None, dimension: int | None = None) -> Configuration:
    """Read a configuration from JSON or CSV.

    A headerless CSV is read as pure coordinates unless ``dimension`` says the
    last column holds weights.
    """
    path = Path(path)
    text = path.read_text()
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    if fmt == "csv" and dimension is not None:
        first = next((r for r in csv.reader(io.StringIO(text)) if r), [])
        if first and all(_is_number(c) for c in first) and len(first) == dimension + 1:
            header = ",".join([f"x{k + 1}" for k in range(dimension)] + ["w"]) + "\n"
            text = header + text
    return loads_configuration(text, fmt)
