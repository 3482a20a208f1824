"""Optional numba acceleration.

Set ``BOSETELE_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. for
debugging or on platforms without numba.
"""
import os

_FLAG = "BOSETELE_DISABLE_NUMBA"


def _disabled() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _disabled():
        raise ImportError(f"numba disabled by {_FLAG}")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit and @njit(...) both become no-ops
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator


BACKEND = "numba" if HAVE_NUMBA else "numpy"
