"""Numba switch.

Kernels are compiled with numba unless ``THINGUIDE_NO_NUMBA`` is set to a
truthy value (or numba cannot be imported), in which case the pure-numpy
implementations in :mod:`thinguide.kernels` are used instead.
"""
import os

_FLAG = os.environ.get("THINGUIDE_NO_NUMBA", "").strip().lower()

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode when numba is available."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)

