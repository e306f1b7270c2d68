"""Kernel backend selection.

Numerical inner loops in this package are written once as plain Python
functions over numpy arrays and compiled with numba when it is available.
Setting the environment variable ``CHEAPSVRG_DISABLE_JIT`` to ``1`` (or
``true``/``yes``/``on``) before import forces the pure-numpy interpretation
of the same source, which is useful for debugging and on platforms without
a working numba install.  Both paths execute the identical sequence of
floating point operations, so a given seed produces the same trajectory
under either backend.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("CHEAPSVRG_DISABLE_JIT", "").strip().lower() in (
    "1",
    "true",
    "yes",
    "on",
)

try:
    import numba

    _HAS_NUMBA = True
except ImportError:
    numba = None
    _HAS_NUMBA = False

JIT_ENABLED = _HAS_NUMBA and not _DISABLED


def maybe_njit(fn):
    """Compile ``fn`` with numba when the jit backend is active.

    ``cache=True`` persists compiled kernels across processes and
    ``nogil=True`` lets independent runs proceed in parallel threads.
    ``fastmath`` stays off: reassociation would break the bit-level
    reproducibility the rest of the package is built on.
    """
    if JIT_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend_name() -> str:
    return "numba" if JIT_ENABLED else "numpy"
