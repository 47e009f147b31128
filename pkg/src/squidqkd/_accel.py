"""Backend selection for the hot numeric kernels.

Kernels are compiled with numba when it is importable and the environment
variable ``SQUIDQKD_DISABLE_NUMBA`` is unset (or ``0``). Otherwise the
pure-numpy implementations in :mod:`squidqkd._kernels` are used. The choice is
made once at import time.
"""

from __future__ import annotations

import os

ENV_FLAG = "SQUIDQKD_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "0").strip().lower() in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and numba_requested()


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged without numba."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
