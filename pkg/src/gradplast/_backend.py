"""Kernel backend selection.

The compiled extension ``gradplast._kernels`` is preferred when importable;
otherwise the numpy fallback is used.  ``GRADPLAST_BACKEND=python`` or
``=compiled`` forces the choice (forcing ``compiled`` raises if the
extension is missing, so CI can assert the build happened).
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("GRADPLAST_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _kernels_py
elif _requested == "compiled":
    from . import _kernels as _impl  # noqa: F401  (ImportError is the point)
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
diff_forward = _impl.diff_forward
diff_forward_adjoint = _impl.diff_forward_adjoint
prox_iso_sweep = _impl.prox_iso_sweep
prox_kin_sweep = _impl.prox_kin_sweep


def available_backends():
    """Names of the kernel implementations importable right now."""
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    return names


def get_backend(name: str):
    """Return the kernel module for an explicit backend name."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}; expected 'python' or 'compiled'")
