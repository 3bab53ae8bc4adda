"""Optional numba acceleration.

Set ``INEQFAIR_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable.
"""
import os

_disabled = os.environ.get("INEQFAIR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    from numba import njit as _numba_njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - depends on environment
    NUMBA_AVAILABLE = False
    _numba_njit = None

USE_NUMBA = NUMBA_AVAILABLE and not _disabled


def njit(func):
    """Compile ``func`` with numba when available; otherwise return it as is."""
    if _numba_njit is None:
        return func
    return _numba_njit(cache=True)(func)


__all__ = ["NUMBA_AVAILABLE", "USE_NUMBA", "njit"]
