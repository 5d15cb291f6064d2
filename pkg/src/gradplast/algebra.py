"""Small-tensor algebra and slip-system geometry.

Vectors and second-order tensors are plain numpy arrays; every helper here
also broadcasts over leading field axes, so the same functions serve both
pointwise algebra and whole grid fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidModel, InvalidSlipSystem

__all__ = [
    "sym",
    "skew",
    "dev",
    "tr",
    "inner",
    "norm",
    "ElasticModuli",
    "SlipSystem",
    "SlipBasis",
    "orientation_tensor",
    "is_mutually_orthogonal",
]

IDENTITY = np.eye(3)

#: unit-norm / orthogonality residual accepted without touching the input
SLIP_EXACT_TOL = 1e-12
#: residual up to which inputs are renormalized instead of rejected
SLIP_RENORM_TOL = 1e-8


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetric part, ``(A + A^T)/2``, over the trailing 3x3 axes."""
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def skew(a: np.ndarray) -> np.ndarray:
    """Skew-symmetric part, ``(A - A^T)/2``."""
    return 0.5 * (a - np.swapaxes(a, -1, -2))


def tr(a: np.ndarray) -> np.ndarray:
    """Trace over the trailing 3x3 axes."""
    return a[..., 0, 0] + a[..., 1, 1] + a[..., 2, 2]


def dev(a: np.ndarray) -> np.ndarray:
    """Deviatoric (traceless) part."""
    return a - (tr(a) / 3.0)[..., None, None] * IDENTITY


def inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Frobenius pairing ``tr(A B^T)`` over the trailing 3x3 axes."""
    return np.einsum("...ij,...ij->...", a, b)


def norm(a: np.ndarray) -> np.ndarray:
    """Frobenius norm over the trailing 3x3 axes."""
    return np.sqrt(inner(a, a))


@dataclass(frozen=True)
class ElasticModuli:
    """Isotropic elasticity, parametrized by the two Lame moduli.

    Parameters
    ----------
    mu : float
        Shear modulus, must be positive.
    lam : float
        Second Lame parameter; ``3*lam + 2*mu`` must be positive so the
        tensor is positive definite on symmetric arguments.
    """

    mu: float
    lam: float

    def __post_init__(self):
        if not (self.mu > 0.0):
            raise InvalidModel(f"shear modulus must be positive, got mu={self.mu}")
        if not (3.0 * self.lam + 2.0 * self.mu > 0.0):
            raise InvalidModel(
                f"need 3*lam + 2*mu > 0, got lam={self.lam}, mu={self.mu}"
            )

    @property
    def kappa(self) -> float:
        """Bulk modulus ``lam + 2*mu/3``."""
        return self.lam + 2.0 * self.mu / 3.0

    @property
    def m0(self) -> float:
        """Sharp ellipticity constant on symmetric tensors.

        The eigenvalues of the tensor on Sym(3) are ``2*mu`` (deviatoric
        eigenspace) and ``2*mu + 3*lam`` (spherical), so the smallest is
        their minimum.
        """
        return min(2.0 * self.mu, 2.0 * self.mu + 3.0 * self.lam)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Apply the elasticity tensor: ``2*mu*sym(X) + lam*tr(X)*id``."""
        return 2.0 * self.mu * sym(x) + self.lam * tr(x)[..., None, None] * IDENTITY


def _unitize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class SlipSystem:
    """One slip system: unit slip direction and unit slip-plane normal.

    Inputs whose unit-norm or orthogonality residuals exceed 1e-12 but stay
    below 1e-8 are renormalized (Gram-Schmidt); anything worse is rejected.
    """

    direction: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        l = np.asarray(self.direction, dtype=float).reshape(3)
        nu = np.asarray(self.normal, dtype=float).reshape(3)
        res = max(
            abs(np.linalg.norm(l) - 1.0),
            abs(np.linalg.norm(nu) - 1.0),
            abs(float(np.dot(l, nu))),
        )
        if res > SLIP_RENORM_TOL:
            raise InvalidSlipSystem(
                f"slip system residual {res:.3e} exceeds {SLIP_RENORM_TOL:.0e} "
                f"(direction={l.tolist()}, normal={nu.tolist()})"
            )
        if res > SLIP_EXACT_TOL:
            l = _unitize(l)
            nu = _unitize(nu - np.dot(nu, l) * l)
        object.__setattr__(self, "direction", l)
        object.__setattr__(self, "normal", nu)

    @property
    def orientation(self) -> np.ndarray:
        """Orientation dyad ``l (x) nu``; traceless with unit norm."""
        return np.outer(self.direction, self.normal)


def orientation_tensor(system: SlipSystem) -> np.ndarray:
    """Orientation dyad of a validated slip system."""
    return system.orientation


@dataclass(frozen=True)
class SlipBasis:
    """Ordered collection of slip systems with cached orientation dyads.

    ``apply`` maps slip vectors (fields) to plastic distortions; ``project``
    is its algebraic adjoint, returning the resolved components of a tensor
    on each system.
    """

    systems: tuple
    orientations: np.ndarray = field(init=False, repr=False, compare=False)
    mutually_orthogonal: bool = field(init=False, repr=False, compare=False)

    def __init__(self, systems: Sequence[SlipSystem]):
        systems = tuple(systems)
        if len(systems) < 1:
            raise InvalidSlipSystem("a slip basis needs at least one system")
        object.__setattr__(self, "systems", systems)
        object.__setattr__(
            self, "orientations", np.stack([s.orientation for s in systems])
        )
        object.__setattr__(
            self, "mutually_orthogonal", _check_mutually_orthogonal(systems)
        )

    @property
    def n_slip(self) -> int:
        return len(self.systems)

    def apply(self, g: np.ndarray) -> np.ndarray:
        """Plastic distortion ``sum_a g_a * m_a`` (broadcasts over fields)."""
        g = np.asarray(g, dtype=float)
        if g.shape[-1] != self.n_slip:
            raise DimensionMismatch(
                f"slip vector has {g.shape[-1]} components, basis has {self.n_slip}"
            )
        return np.einsum("...a,aij->...ij", g, self.orientations)

    def project(self, a: np.ndarray) -> np.ndarray:
        """Resolved components ``<A, m_a>`` for each system."""
        a = np.asarray(a, dtype=float)
        if a.shape[-2:] != (3, 3):
            raise DimensionMismatch(f"expected trailing 3x3 axes, got {a.shape}")
        return np.einsum("...ij,aij->...a", a, self.orientations)

    def sym_gram(self) -> np.ndarray:
        """Gram matrix of the symmetrized dyads, ``<sym m_a, sym m_b>``."""
        s = sym(self.orientations)
        return np.einsum("aij,bij->ab", s, s)


def _check_mutually_orthogonal(systems) -> bool:
    for a in range(len(systems)):
        for b in range(a + 1, len(systems)):
            la, na = systems[a].direction, systems[a].normal
            lb, nb = systems[b].direction, systems[b].normal
            if abs(np.dot(la, lb)) > SLIP_EXACT_TOL:
                return False
            if abs(np.dot(na, nb)) > SLIP_EXACT_TOL:
                return False
            if min(abs(np.dot(la, nb)), abs(np.dot(na, lb))) > SLIP_EXACT_TOL:
                return False
    return True


def is_mutually_orthogonal(basis: SlipBasis) -> bool:
    """Mutual orthogonality of the slip systems.

    True iff, for every pair of systems, the slip directions are
    orthogonal, the plane normals are orthogonal, and at least one of the
    two cross pairings direction/normal vanishes.  The coordinate-plane
    triple with in-plane axis directions qualifies; under this condition
    the symmetrized dyads are pairwise orthogonal, each of squared norm
    one half, which is exactly what makes the Prager hardening energy
    positive definite in the slips.
    """
    return basis.mutually_orthogonal
