"""Numeric kernels for the homotopy flow hot loop.

The compiled Cython backend is selected at import when available; otherwise
the pure-Python fallback is used. Both expose the same functions over a
shared :class:`SystemTable` and produce bit-identical doubles.
"""

from .table import (
    SLOT_D,
    SLOT_F,
    SLOT_GRAD_F,
    STATUS_IN_ZERO_SET,
    STATUS_INCONSISTENT,
    STATUS_OK,
    STATUS_POLE,
    SystemTable,
)
from . import _fallback

try:
    from . import _native
    HAVE_NATIVE = True
except ImportError:
    _native = None
    HAVE_NATIVE = False

DEFAULT_BACKEND = _native if HAVE_NATIVE else _fallback


def available_backends():
    return ("native", "fallback") if HAVE_NATIVE else ("fallback",)


def get_backend(name="auto"):
    """Resolve a backend module by name ("auto", "native", "fallback")."""
    if name in (None, "auto"):
        return DEFAULT_BACKEND
    if name == "native":
        if not HAVE_NATIVE:
            raise RuntimeError("compiled kernels are not available in this build")
        return _native
    if name == "fallback":
        return _fallback
    raise ValueError(f"unknown kernel backend {name!r}")
