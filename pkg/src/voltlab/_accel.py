"""Numba switch.

Set ``VOLTLAB_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The flag is
read once at import time.
"""

import os

_DISABLED = os.environ.get("VOLTLAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when available, otherwise ``func`` unchanged.

    No ``fastmath``: the compiled kernels must reproduce the numpy kernels
    bit for bit.
    """
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
