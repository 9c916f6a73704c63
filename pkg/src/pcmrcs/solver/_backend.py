"""Pick the Yee-update kernels at import time.

The compiled extension is used when it imports; set ``PCMRCS_KERNELS=python``
to force the numpy fallback.
"""

import os

from . import _kernels_py

kernels = _kernels_py
NAME = "python"

if os.environ.get("PCMRCS_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # not built
        pass
    else:
        kernels = _compiled
        NAME = "cython"


def get(name: str | None = None):
    """Kernel module by name (``"python"`` or ``"cython"``); default is the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
