"""Select the compiled kernel when available, else the numpy fallback.

Set ``NNKOP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from nnkop import _fallback

BACKEND = "python"
apply_separable = _fallback.apply_separable

if os.environ.get("NNKOP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from nnkop import _kernels
    except ImportError:  # extension not built
        _kernels = None
    else:
        BACKEND = "cython"
        apply_separable = _kernels.apply_separable
