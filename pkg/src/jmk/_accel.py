"""Switch between numba-compiled kernels and their pure-numpy fallbacks.

Set ``JMK_DISABLE_NUMBA=1`` in the environment before importing :mod:`jmk`
to force the numpy path even when numba is installed.
"""

import os

DISABLE_FLAG = "JMK_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the dev environment
    numba = None
    HAVE_NUMBA = False


def _numba_requested():
    value = os.environ.get(DISABLE_FLAG, "").strip().lower()
    return value not in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and _numba_requested()


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)
