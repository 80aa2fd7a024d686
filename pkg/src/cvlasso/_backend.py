"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it is
missing. ``CVLASSO_BACKEND`` (``native`` or ``python``) overrides the default.
"""
import os

from . import _pykernels

try:
    from . import _kernels as _native
except ImportError:  # extension not built
    _native = None

BACKENDS = {"python": _pykernels}
if _native is not None:
    BACKENDS["native"] = _native


def native_available():
    return _native is not None


def _default():
    name = os.environ.get("CVLASSO_BACKEND", "").strip().lower()
    if name:
        if name not in BACKENDS:
            raise ImportError(f"CVLASSO_BACKEND={name!r} is not available; have {sorted(BACKENDS)}")
        return BACKENDS[name]
    return _native if _native is not None else _pykernels


DEFAULT = _default()


def get(name="auto"):
    """Return the kernel module for ``name`` (``auto``, ``native`` or ``python``)."""
    if name == "auto":
        return DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}") from None
