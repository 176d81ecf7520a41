"""Select the compiled kernels when importable, else the NumPy fallback.

Set ``BDCHAIN_BACKEND=python`` to force the fallback.
"""

import logging
import os

log = logging.getLogger(__name__)


def _load(name=None):
    name = name or os.environ.get("BDCHAIN_BACKEND", "auto")
    if name not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name != "python":
        try:
            from . import _kernels

            return _kernels
        except ImportError:
            if name == "compiled":
                raise
            log.debug("compiled kernels unavailable, using NumPy fallback")
    from . import _fallback

    return _fallback


kernels = _load()
BACKEND = kernels.BACKEND


def get(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    return _load(name)
