"""Numba switch.

Hot kernels are written once as plain Python loops and compiled with
``numba.njit`` when numba is importable and ``CARE2VEC_NUMBA`` is not set
to ``0``. The flag is read at import time; set it before importing the
package to force the pure-numpy path.
"""
import os

_FLAG = os.environ.get("CARE2VEC_NUMBA", "1").strip().lower()
_REQUESTED = _FLAG not in ("0", "false", "no", "off")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _REQUESTED


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged without numba."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)


def backend():
    return "numba" if USE_NUMBA else "numpy"
