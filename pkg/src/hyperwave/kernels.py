"""Backend selection for the hot loops.

The compiled Cython module is used when it was built; otherwise, or when the
environment variable ``HYPERWAVE_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the pure-Python reference implementation is used.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("HYPERWAVE_PURE_PYTHON", "") not in ("", "0")

_compiled = None
if not _force_py:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

BACKEND = _impl.BACKEND
hyp_series = _impl.hyp_series
taylor_step = _impl.taylor_step
rk4_linear = _impl.rk4_linear
rk4_cubic = _impl.rk4_cubic
rk4_forced = _impl.rk4_forced


def available_backends():
    """Names and modules of every importable backend."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _kernels

            out["cython"] = _kernels
        except ImportError:
            pass
    return out
