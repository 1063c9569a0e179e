"""Selects the kernel backend: the compiled ``_core`` extension when it is
importable, otherwise the numpy implementation in ``_pykernels``.

Set ``LWRDG_PURE_PYTHON=1`` to force the fallback.
"""

import contextlib
import os

from . import _pykernels

FLUX_LF = 0
FLUX_GODUNOV = 1

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

COMPILED_AVAILABLE = _core is not None

if COMPILED_AVAILABLE and not os.environ.get("LWRDG_PURE_PYTHON"):
    backend = _core
else:
    backend = _pykernels


def backend_name() -> str:
    return "compiled" if backend is _core else "python"


@contextlib.contextmanager
def use(name: str):
    """Temporarily switch backend (``"compiled"`` or ``"python"``)."""
    global backend
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not built")
        new = _core
    elif name == "python":
        new = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    old, backend = backend, new
    try:
        yield
    finally:
        backend = old
