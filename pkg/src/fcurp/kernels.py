"""Select the compiled kernels when available, else the pure-Python ones.

Set ``FCURP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("FCURP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

local_search = _impl.local_search
oracle_search = _impl.oracle_search
tour_length = _kernels_py.tour_length

__all__ = ["BACKEND", "local_search", "oracle_search", "tour_length"]
