"""Hot kernels with a compiled core and a numpy fallback.

The Cython extension is used when it was built; otherwise, or when the
environment variable ``SPECTRAL_CUTOFF_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the numpy implementation is loaded.  ``BACKEND``
names the active implementation.
"""
import os

from . import _fallback

_force_py = os.environ.get("SPECTRAL_CUTOFF_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

direct_coefficients = _impl.direct_coefficients
block_sums = _impl.block_sums
argmin_first = _impl.argmin_first


def compiled_available():
    try:
        from . import _core  # noqa: F401
    except ImportError:
        return False
    return True


__all__ = ["BACKEND", "direct_coefficients", "block_sums", "argmin_first",
           "compiled_available"]
