"""Time the compiled pair sums against the NumPy fallback.

Usage: python benchmarks/bench_pairsum.py [--sizes 200,800,2000] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from eucdesign import _pairsum_py
from eucdesign.harmonics import gegenbauer_table

try:
    from eucdesign import _pairsum as _ext
except ImportError:
    _ext = None


def _cloud(n, d, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, d))
    norms = np.linalg.norm(pts, axis=1)
    return pts, pts / norms[:, None], norms, rng.uniform(0.5, 1.5, n)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,800,2000")
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    tab = gegenbauer_table(args.d, 8)
    a, b = tab.alpha_float, tab.beta_float
    backends = {"python": _pairsum_py}
    if _ext is not None:
        backends["cython"] = _ext
    else:
        print("compiled extension not built; timing the fallback only")
    print(f"{'n':>6}  {'task':<16}" + "".join(f"{k:>12}" for k in backends) + ("     speedup" if _ext else ""))
    for n in map(int, args.sizes.split(",")):
        pts, unit, norms, w = _cloud(n, args.d)
        tasks = {
            "moments 4x8": lambda m: m.pair_moments(unit, norms, w, a, b, 4, 8),
            "energy riesz:1": lambda m: m.pair_energy(pts, unit, w, _pairsum_py.RIESZ, np.array([1.0])),
            "energy poly-u": lambda m: m.pair_energy(pts, unit, w, _pairsum_py.POLY_U, np.array([64.0, -48, 12, -1])),
        }
        for name, task in tasks.items():
            times = {k: min(timeit.repeat(lambda m=m: task(m), number=1, repeat=args.repeat)) for k, m in backends.items()}
            row = f"{n:>6}  {name:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
            if _ext is not None:
                row += f"{times['python'] / times['cython']:>11.1f}x"
            print(row)


if __name__ == "__main__":
    main()
