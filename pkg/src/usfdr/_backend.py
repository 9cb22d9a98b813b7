"""Pick the compiled kernels when available, else the numpy fallback.

Set ``USFDR_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

if os.environ.get("USFDR_PURE_PYTHON", "") not in ("", "0"):
    kernels = _fallback
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _fallback

BACKEND = "fallback" if kernels is _fallback else "compiled"
