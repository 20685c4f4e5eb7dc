"""Numba availability, the numpy fallback switch, and thread capping.

Set ``SPPKIT_NO_NUMBA=1`` to force the pure-numpy kernels even when numba is
installed.  ``SPPKIT_THREADS`` caps the numba worker pool.
"""

import os

try:
    import numba
    from numba import njit, prange

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the system TBB is often too old and numba warns on every import
        numba.config.THREADING_LAYER = "workqueue"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator

    prange = range


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _flag("SPPKIT_NO_NUMBA")

JIT_OPTIONS = {"cache": True, "nogil": True}


def configure_threads(limit=None):
    """Cap numba's worker threads at ``limit`` or ``$SPPKIT_THREADS``."""
    if limit is None:
        raw = os.environ.get("SPPKIT_THREADS")
        if not raw:
            return None
        limit = int(raw)
    if not HAVE_NUMBA:
        return None
    limit = max(1, min(int(limit), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(limit)
    return limit
