"""Select the compiled pair-sum kernels when built, else the NumPy fallback.

Set ``EUCDESIGN_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pairsum_py

BACKEND = "python"
pair_moments = _pairsum_py.pair_moments
pair_energy = _pairsum_py.pair_energy

if not os.environ.get("EUCDESIGN_PURE_PYTHON"):
    try:
        from . import _pairsum as _ext
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        pair_moments = _ext.pair_moments
        pair_energy = _ext.pair_energy

RIESZ = _pairsum_py.RIESZ
POLY_U = _pairsum_py.POLY_U
POLY_T = _pairsum_py.POLY_T
INNER_POWER = _pairsum_py.INNER_POWER
