"""Kernel backend selection: compiled extension when available, else fallback.

Set ``TORUSTOMO_FORCE_FALLBACK=1`` to force the pure-Python implementations
(used by the benchmark and the cross-checking tests).
"""

import os

from . import fallback

try:
    from . import _core
except ImportError:
    _core = None

if _core is not None and not os.environ.get("TORUSTOMO_FORCE_FALLBACK"):
    _backend = _core
    BACKEND = "compiled"
else:
    _backend = fallback
    BACKEND = "fallback"

reduce_boundary = _backend.reduce_boundary
sign_change_counts = _backend.sign_change_counts


def backend_name():
    return BACKEND
