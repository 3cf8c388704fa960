"""Kernel backend selection.

The compiled Cython core is preferred; a vectorized numpy fallback with
identical semantics is used when the extension is unavailable or when
``TALBOTLAU_FORCE_FALLBACK`` is set.  ``BACKEND`` records the choice and
is stamped into CSV output headers.
"""
import os

from . import _fallback

if os.environ.get("TALBOTLAU_FORCE_FALLBACK"):
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"

LAW_ZERO = _fallback.LAW_ZERO
LAW_INV3 = _fallback.LAW_INV3
LAW_INV4 = _fallback.LAW_INV4
LAW_LIGHT = _fallback.LAW_LIGHT
LAW_INV3_DERIV = _fallback.LAW_INV3_DERIV
LAW_INV4_DERIV = _fallback.LAW_INV4_DERIV
LAW_LIGHT_DERIV = _fallback.LAW_LIGHT_DERIV

oscillatory_segments = _impl.oscillatory_segments
fresnel_transform = _impl.fresnel_transform

__all__ = ["BACKEND", "oscillatory_segments", "fresnel_transform",
           "LAW_ZERO", "LAW_INV3", "LAW_INV4", "LAW_LIGHT",
           "LAW_INV3_DERIV", "LAW_INV4_DERIV", "LAW_LIGHT_DERIV"]
