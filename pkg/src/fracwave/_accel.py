"""Numba switch.

Set ``FRACWAVE_NUMBA=0`` before import to run every kernel through its
pure-numpy path.  Numba is also skipped silently when it is not installed.
"""
import os

_flag = os.environ.get("FRACWAVE_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None
    USE_NUMBA = False

HAVE_NUMBA = numba is not None


def njit(func):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)
