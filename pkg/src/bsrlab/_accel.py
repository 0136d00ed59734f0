"""Numba switch.

Set ``BSRLAB_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
"""
import os

_FLAG = os.environ.get("BSRLAB_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in {"1", "true", "yes", "on"}

JIT_OPTIONS = dict(cache=True, nogil=True, fastmath=False, error_model="numpy")


def njit(func):
    """Compile ``func`` in nopython mode when numba is available, else return it."""
    if numba is None:
        return func
    return numba.njit(**JIT_OPTIONS)(func)
