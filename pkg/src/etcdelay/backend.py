"""Kernel backend selection.

The compiled Cython kernel is preferred when present; the pure-Python twin
is the fallback.  `ETCDELAY_BACKEND=python|compiled` forces a choice at
import time (forcing `compiled` raises if the extension is missing).
"""

import os

from . import _kernel_py

_FORCE = os.environ.get("ETCDELAY_BACKEND", "").strip().lower()

if _FORCE == "python":
    kernel = _kernel_py
else:
    try:
        from . import _kernel as kernel  # type: ignore[no-redef]
    except ImportError:
        if _FORCE == "compiled":
            raise
        kernel = _kernel_py

DEFAULT = kernel.BACKEND_NAME


def available_backends():
    names = ["python"]
    try:
        from . import _kernel  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    return names


def get_kernel(name=None):
    """Return a kernel module by name ('python' or 'compiled');
    None selects the import-time default."""
    if name is None:
        return kernel
    if name == "python":
        return _kernel_py
    if name == "compiled":
        from . import _kernel
        return _kernel
    raise ValueError(f"unknown backend {name!r}")
