"""Hot numeric kernels with a numba path and a numpy fallback.

The active backend is chosen once at import (see ``gradsat._accel``).
Both implementations stay importable as ``kernels.numpy_backend`` and
``kernels.numba_backend`` so they can be compared directly.
"""

import numpy as np

from .. import _accel
from . import _numpy as numpy_backend

if _accel.NUMBA_AVAILABLE:
    from . import _numba as numba_backend
else:  # pragma: no cover
    numba_backend = None

BACKEND = "numba" if _accel.USE_NUMBA else "numpy"
_impl = numba_backend if _accel.USE_NUMBA else numpy_backend


def backends():
    out = {"numpy": numpy_backend}
    if numba_backend is not None:
        out["numba"] = numba_backend
    return out


def spmm_forward(row_offsets, col_indices, A):
    return _impl.spmm_forward(row_offsets, col_indices, np.ascontiguousarray(A))


def spmm_transpose(row_offsets, col_indices, G, n_cols):
    G = np.ascontiguousarray(G, dtype=np.float64)
    return _impl.spmm_transpose(row_offsets, col_indices, G, n_cols)


def smooth_min_columns(R, tau):
    return _impl.smooth_min_columns(np.ascontiguousarray(R, dtype=np.float64), float(tau))


def smooth_min_grad(R, tau):
    R = np.asarray(R)
    if R.dtype.kind in "iu":
        return _impl.smooth_min_grad_int(np.ascontiguousarray(R, dtype=np.int64), float(tau))
    return _impl.smooth_min_grad(np.ascontiguousarray(R, dtype=np.float64), float(tau))
