"""Hot inner loops, compiled when available.

The Cython extension is used if it was built; otherwise (or when the
environment variable ``SONIFY_PURE_PYTHON`` is set) the numpy/pure-Python
fallback is loaded. ``BACKEND`` names the active implementation.
"""
import os

from . import _pykernels

if os.environ.get("SONIFY_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

onepole_lowpass = _impl.onepole_lowpass
accumulate_phase = _impl.accumulate_phase
mix_add = _impl.mix_add

__all__ = ["BACKEND", "onepole_lowpass", "accumulate_phase", "mix_add"]
