"""Optional numba acceleration.

Set ``VIPURSUIT_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The flag is
read once at import time.
"""
import os

_flag = os.environ.get("VIPURSUIT_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

USE_NUMBA = numba is not None and not DISABLED


def njit(func):
    """Compile ``func`` with ``numba.njit`` when acceleration is enabled."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)


def select(jitted, fallback):
    """Pick the compiled kernel or the numpy fallback according to the flag."""
    return jitted if USE_NUMBA else fallback
