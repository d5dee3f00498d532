"""Pick the CSR kernel implementation at import time.

``SIGNUM_BACKEND`` may be ``auto`` (default), ``cython`` or ``python``.
"""
from __future__ import annotations

import os

from . import _pykernels

_requested = os.environ.get("SIGNUM_BACKEND", "auto").lower()

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

if _requested == "python" or _ckernels is None:
    if _requested == "cython":
        raise ImportError("SIGNUM_BACKEND=cython but signum._ckernels is not built")
    kernels = _pykernels
    BACKEND = "python"
else:
    kernels = _ckernels
    BACKEND = "cython"

# reserved; every kernel is single-threaded today
THREADS = int(os.environ.get("SIGNUM_THREADS", "1"))


def available_backends():
    """Names of kernel modules importable in this process."""
    names = ["python"]
    if _ckernels is not None:
        names.append("cython")
    return names


def get_kernels(name):
    if name == "python":
        return _pykernels
    if name == "cython" and _ckernels is not None:
        return _ckernels
    raise ValueError(f"kernel backend {name!r} is not available")
