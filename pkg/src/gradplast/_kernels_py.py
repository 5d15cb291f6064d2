"""Pure numpy implementations of the hot kernels.

These four functions are the per-cell inner loops everything else is built
from: one-sided differences along a grid axis (with their exact adjoints)
and the scalar proximal maps swept over whole slip fields.  A compiled
twin lives in ``_kernels.pyx``; both must compute bitwise-identical
results, which the test suite asserts.

Field arrays carry the grid axes first, ``(nx, ny, nz, ...)``, and are
float64.  ``zero_closure`` selects the boundary rule at the far (+) end of
the axis: True extends the field by zero beyond the grid, False copies the
last value (so the difference vanishes).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def diff_forward(a: np.ndarray, axis: int, h: float, zero_closure: bool) -> np.ndarray:
    """Forward difference ``(a[i+1] - a[i]) / h`` along a grid axis."""
    out = np.empty_like(a)
    src = np.moveaxis(a, axis, 0)
    dst = np.moveaxis(out, axis, 0)
    dst[:-1] = src[1:]
    dst[:-1] -= src[:-1]
    if zero_closure:
        np.negative(src[-1], out=dst[-1])
    else:
        dst[-1] = 0.0
    out /= h
    return out


def diff_forward_adjoint(
    a: np.ndarray, axis: int, h: float, zero_closure: bool
) -> np.ndarray:
    """Exact transpose of :func:`diff_forward` with the same closure."""
    out = np.empty_like(a)
    src = np.moveaxis(a, axis, 0)
    dst = np.moveaxis(out, axis, 0)
    if src.shape[0] == 1:
        # single layer: the whole operator is the closure column
        if zero_closure:
            np.negative(src[0], out=dst[0])
        else:
            dst[0] = 0.0
    else:
        dst[1:] = src[:-1]
        dst[1:-1] -= src[1:-1]
        np.negative(src[0], out=dst[0])
        if zero_closure:
            dst[-1] -= src[-1]
    out /= h
    return out


def prox_iso_sweep(
    x: np.ndarray, t: float, sigma0: float, mu_k2: float, eta_prev: np.ndarray
) -> np.ndarray:
    """Elementwise isotropic-hardening prox.

    Minimizes ``(d - x)^2 / (2 t) + sigma0 |d| + mu_k2 (eta_prev + |d|)^2 / 2``
    per entry; closed form is a shifted soft threshold with slope reduction
    ``1 / (1 + t mu_k2)``.
    """
    threshold = t * (sigma0 + mu_k2 * eta_prev)
    mag = np.abs(x) - threshold
    np.maximum(mag, 0.0, out=mag)
    mag /= 1.0 + t * mu_k2
    return np.sign(x) * mag


def prox_kin_sweep(x: np.ndarray, t: float, sigma0: float) -> np.ndarray:
    """Elementwise soft threshold at ``t * sigma0``."""
    mag = np.abs(x) - t * sigma0
    np.maximum(mag, 0.0, out=mag)
    return np.sign(x) * mag
