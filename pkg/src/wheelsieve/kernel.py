"""Backend selection for the sieving kernels.

The compiled extension is preferred. Setting ``WHEELSIEVE_BACKEND=python``
forces the numpy fallback; it is also used automatically when the extension
is missing.
"""
from __future__ import annotations

import logging
import os
from types import ModuleType

from . import _pykernel

log = logging.getLogger(__name__)

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKENDS: dict[str, ModuleType] = {"python": _pykernel}
if _ckernel is not None:
    BACKENDS["compiled"] = _ckernel


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module called ``name``, or the import-time default."""
    if name is None:
        return default
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; available: {sorted(BACKENDS)}"
        ) from None


def _select() -> ModuleType:
    wanted = os.environ.get("WHEELSIEVE_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in BACKENDS:
            log.warning("WHEELSIEVE_BACKEND=%s not available, using fallback", wanted)
            return _pykernel
        return BACKENDS[wanted]
    return BACKENDS.get("compiled", _pykernel)


default = _select()
