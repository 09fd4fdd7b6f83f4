"""Hot kernels with a compiled backend and a NumPy fallback.

The compiled extension ``_core`` is used when it imports; set
``SYMLAB_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback as fallback

try:
    if os.environ.get("SYMLAB_PURE_PYTHON", "").strip() not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _core as compiled
except ImportError:
    compiled = None

_impl = compiled if compiled is not None else fallback
BACKEND = "compiled" if compiled is not None else "python"

sigma_min_real = _impl.sigma_min_real
sigma_min_complex = _impl.sigma_min_complex
sigma_min_batch_real = _impl.sigma_min_batch_real
sigma_min_batch_complex = _impl.sigma_min_batch_complex
cantor_function = _impl.cantor_function
cantor_scalar = fallback.cantor_scalar

__all__ = [
    "BACKEND",
    "cantor_function",
    "cantor_scalar",
    "compiled",
    "fallback",
    "sigma_min_batch_complex",
    "sigma_min_batch_real",
    "sigma_min_complex",
    "sigma_min_real",
]
