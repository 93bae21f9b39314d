"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set ``FGSIM_PURE_PYTHON=1`` to force the numpy versions.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("FGSIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "compiled"

pfaffian = _impl.pfaffian
rotate_pair = _impl.rotate_pair
project_cov = _impl.project_cov
overlap_kernel = _impl.overlap_kernel
overlap_row_kernel = _impl.overlap_row_kernel
basis_word = _impl.basis_word


def backends():
    """Return a mapping name -> kernel module for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
        found["compiled"] = compiled
    except ImportError:
        pass
    return found
