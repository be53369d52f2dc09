"""Kernel backend selection.

The compiled extension is preferred; set ``VERTEXKIT_PURE_PYTHON=1`` to force
the NumPy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_compiled = None

if not os.environ.get("VERTEXKIT_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled

        BACKEND = "cython"
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

taylor_recurrence = _impl.taylor_recurrence
parity_partial_sums = _impl.parity_partial_sums
f_closed_form = _impl.f_closed_form


def backends():
    """Available kernel modules keyed by name (used by the benchmark and tests)."""
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
