"""Backend switch for the numeric kernels.

Set ``GRADSAT_NUMBA=0`` to force the pure-numpy path. Numba is used by
default when it imports.
"""

import os

_flag = os.environ.get("GRADSAT_NUMBA", "1").strip().lower()

try:
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

USE_NUMBA = NUMBA_AVAILABLE and _flag not in ("0", "false", "no", "off")
