"""Kernel backend selection: compiled extension with pure-numpy fallback.

The compiled module is preferred when importable; set the environment
variable ``SGSLASSO_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("SGSLASSO_PURE_PYTHON") == "1":
    kernels = _kernels_py
    HAVE_COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        HAVE_COMPILED = True
    except ImportError:
        kernels = _kernels_py
        HAVE_COMPILED = False


def backend_name():
    return "compiled" if kernels is not _kernels_py else "python"


def available_backends():
    """Mapping of backend name to kernel module, for benchmarks and tests."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
