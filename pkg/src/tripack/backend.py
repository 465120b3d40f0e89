"""Kernel backend selection.

Hot loops are written as plain functions over numpy arrays and scalars, then
wrapped by :func:`kernel`.  With the default backend the wrapper is
``numba.njit(cache=True, nogil=True)``; with ``TRIPACK_BACKEND=python`` the
functions run as ordinary interpreted Python (slow, but handy for debugging
and for the backend benchmark).  Both paths execute the exact same source and
consume the same pre-generated random streams, so results are bit-identical.
"""

import os

_ENV_VAR = "TRIPACK_BACKEND"
_choice = os.environ.get(_ENV_VAR, "auto").strip().lower()

if _choice in ("python", "numpy", "off", "0"):
    USE_NUMBA = False
elif _choice in ("auto", "", "numba", "1"):
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise
        USE_NUMBA = False
else:
    raise RuntimeError(f"unrecognized {_ENV_VAR}={_choice!r} (use 'numba' or 'python')")

BACKEND = "numba" if USE_NUMBA else "python"

if USE_NUMBA:
    from numba import njit as _njit

    def kernel(func):
        return _njit(cache=True, nogil=True)(func)

else:

    def kernel(func):
        return func
