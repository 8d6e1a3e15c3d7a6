"""Backend selection for the propagation kernel.

The compiled extension is used when it imports; setting
``CONSDICH_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

from . import _propagate

BACKEND = "python"
propagate = _propagate.propagate

if os.environ.get("CONSDICH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel
    except ImportError:
        pass
    else:
        propagate = _kernel.propagate
        BACKEND = "cython"


def get_backend(name: str):
    """Return the ``propagate`` function of a named backend (for benchmarks)."""
    if name == "python":
        return _propagate.propagate
    if name == "cython":
        from . import _kernel

        return _kernel.propagate
    raise ValueError(f"unknown backend {name!r}")
