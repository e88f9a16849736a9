"""Statevector kernel backends.

The compiled Cython kernel is preferred when present; otherwise the numpy
implementation is used. GEOQGAN_BACKEND=numpy|cython forces the choice
(cython raises if the extension was not built).
"""
import os

_requested = os.environ.get("GEOQGAN_BACKEND", "auto")

if _requested == "numpy":
    from . import numpy_backend as active
elif _requested == "cython":
    from . import _cykernel as active  # type: ignore[attr-defined]
elif _requested == "auto":
    try:
        from . import _cykernel as active  # type: ignore[attr-defined]
    except ImportError:
        from . import numpy_backend as active
else:
    raise ValueError(f"unknown GEOQGAN_BACKEND {_requested!r} (expected auto, numpy or cython)")

BACKEND_NAME = active.NAME
