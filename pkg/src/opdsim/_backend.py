"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twins take over. Set ``OPDSIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels as python_kernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("OPDSIM_PURE_PYTHON", "") in ("", "0"):
    kernels = compiled_kernels
    BACKEND = "cython"
else:
    kernels = python_kernels
    BACKEND = "python"


def get_kernels(name=None):
    """Return the kernel module for ``name`` ("cython", "python") or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return python_kernels
    if name == "cython":
        if compiled_kernels is None:
            raise ImportError("compiled kernels are not available; build the extension")
        return compiled_kernels
    raise ValueError(f"unknown backend {name!r}")
