"""Numba switch.

Set ``GRAMQFI_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable.
"""

import os

_FLAG = "GRAMQFI_DISABLE_NUMBA"


def _truthy(value):
    return value.strip().lower() not in ("", "0", "false", "no", "off")


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and not _truthy(os.environ.get(_FLAG, ""))


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        from numba import njit as _njit

        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
