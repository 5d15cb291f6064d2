"""Material model: free energy, stresses, yield and dissipation functions,
and the assembled quadratic/linear functionals of the weak formulation.

Three hardening families are supported:

* isotropic: quadratic energy ``mu k2 |eta|^2 / 2`` in per-system hardening
  variables, which also bound the slip rates;
* general quadratic kinematic: ``<H gamma, gamma> / 2`` with a symmetric
  positive definite coupling matrix;
* Prager kinematic: ``mu k1 |sym p|^2 / 2``, admitted only for mutually
  orthogonal slip systems, where it is positive definite in the slips.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import grid
from .algebra import ElasticModuli, SlipBasis, dev, inner, sym, tr
from .errors import DimensionMismatch, InvalidModel
from .grid import GridSpec, check_field, curl, curl_adjoint, grad, l2_inner

__all__ = [
    "IsotropicHardening",
    "QuadraticHardening",
    "PragerHardening",
    "MaterialParams",
    "State",
    "DerivedState",
    "EnergyBreakdown",
    "zero_state",
    "validate_model",
    "plastic_distortion",
    "cauchy_stress",
    "dislocation_density",
    "eshelby_stress",
    "resolved_stresses",
    "yield_function",
    "dissipation_density",
    "dissipation_increment",
    "free_energy",
    "bilinear_a",
    "load_pairing",
]


@dataclass(frozen=True)
class IsotropicHardening:
    """Isotropic hardening with dimensionless modulus ``k2 > 0``."""

    k2: float

    def __post_init__(self):
        if not (self.k2 > 0.0):
            raise InvalidModel(f"isotropic hardening needs k2 > 0, got {self.k2}")


@dataclass(frozen=True)
class QuadraticHardening:
    """Kinematic hardening with an SPD coupling matrix (stress units)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidModel(f"hardening matrix must be square, got {m.shape}")
        if np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise InvalidModel("hardening matrix must be symmetric")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise InvalidModel("hardening matrix must be positive definite") from None
        object.__setattr__(self, "matrix", m)

    @property
    def lambda_min(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass(frozen=True)
class PragerHardening:
    """Prager kinematic hardening with dimensionless modulus ``k1 > 0``.

    Only valid with mutually orthogonal slip systems; with skew systems the
    energy admits slip-space null directions and the problem loses
    coercivity, so :func:`validate_model` rejects the combination.
    """

    k1: float

    def __post_init__(self):
        if not (self.k1 > 0.0):
            raise InvalidModel(f"Prager hardening needs k1 > 0, got {self.k1}")


HardeningLaw = Union[IsotropicHardening, QuadraticHardening, PragerHardening]


@dataclass(frozen=True)
class MaterialParams:
    elastic: ElasticModuli
    L_c: float
    sigma0: float
    hardening: HardeningLaw

    def __post_init__(self):
        if not (self.sigma0 > 0.0):
            raise InvalidModel(f"initial yield stress must be > 0, got {self.sigma0}")
        if self.L_c < 0.0:
            raise InvalidModel(f"length scale must be >= 0, got {self.L_c}")

    @property
    def is_isotropic(self) -> bool:
        return isinstance(self.hardening, IsotropicHardening)


def validate_model(m: MaterialParams, basis: SlipBasis):
    """Reject parameter/basis combinations with no coercivity guarantee."""
    if isinstance(m.hardening, PragerHardening) and not basis.mutually_orthogonal:
        raise InvalidModel(
            "Prager hardening requires mutually orthogonal slip systems; "
            "the given basis has coupled systems")
    if isinstance(m.hardening, QuadraticHardening):
        n = m.hardening.matrix.shape[0]
        if n != basis.n_slip:
            raise InvalidModel(
                f"hardening matrix is {n}x{n} but the basis has "
                f"{basis.n_slip} systems")


def hardening_stiffness(m: MaterialParams, basis: SlipBasis) -> np.ndarray:
    """Slip-space Hessian of the kinematic hardening energy (n x n)."""
    law = m.hardening
    if isinstance(law, QuadraticHardening):
        return law.matrix
    if isinstance(law, PragerHardening):
        return m.elastic.mu * law.k1 * basis.sym_gram()
    raise InvalidModel("isotropic hardening has no slip-space stiffness")


@dataclass
class State:
    """Discrete unknowns at one time instant.

    ``eta`` is present only for the isotropic law; kinematic laws carry no
    hardening variable.
    """

    u: np.ndarray
    gamma: np.ndarray
    eta: Optional[np.ndarray] = None

    def copy(self) -> "State":
        return State(self.u.copy(), self.gamma.copy(),
                     None if self.eta is None else self.eta.copy())


def zero_state(spec: GridSpec, basis: SlipBasis, m: MaterialParams) -> State:
    eta = grid.zeros_field("slip", spec, basis.n_slip) if m.is_isotropic else None
    return State(grid.zeros_field("vec3", spec),
                 grid.zeros_field("slip", spec, basis.n_slip), eta)


def check_state(s: State, spec: GridSpec, basis: SlipBasis, m: MaterialParams):
    check_field(s.u, "vec3", spec)
    check_field(s.gamma, "slip", spec, basis.n_slip)
    if m.is_isotropic:
        if s.eta is None:
            raise DimensionMismatch("isotropic law needs an eta field")
        check_field(s.eta, "slip", spec, basis.n_slip)


def plastic_distortion(gamma: np.ndarray, basis: SlipBasis) -> np.ndarray:
    return basis.apply(gamma)


def cauchy_stress(s: State, m: MaterialParams, basis: SlipBasis,
                  spec: GridSpec) -> np.ndarray:
    """Stress from the elastic law applied to the elastic strain."""
    e = grad(s.u, spec) - basis.apply(s.gamma)
    return m.elastic.apply(sym(e))


def dislocation_density(gamma: np.ndarray, basis: SlipBasis,
                        spec: GridSpec) -> np.ndarray:
    """Row-wise curl of the plastic distortion; row-wise divergence-free
    by the stencil structure."""
    return curl(basis.apply(gamma), spec)


def curl_curl_distortion(gamma: np.ndarray, basis: SlipBasis,
                         spec: GridSpec) -> np.ndarray:
    """curl-adjoint of curl of the plastic distortion.

    Using the discrete adjoint (rather than a second forward curl) makes
    this field exactly the gradient of the discrete defect energy, which is
    what keeps optimality residuals at solver precision instead of
    stagnating at stencil-truncation level.
    """
    return curl_adjoint(curl(basis.apply(gamma), spec), spec)


def eshelby_stress(s: State, m: MaterialParams, basis: SlipBasis,
                   spec: GridSpec) -> np.ndarray:
    sigma = cauchy_stress(s, m, basis, spec)
    if m.L_c == 0.0:
        return sigma
    mu_lc2 = m.elastic.mu * m.L_c ** 2
    return sigma - mu_lc2 * curl_curl_distortion(s.gamma, basis, spec)


def local_backstress(gamma: np.ndarray, m: MaterialParams,
                     basis: SlipBasis) -> Optional[np.ndarray]:
    """Slip-space backstress from the kinematic hardening energy, or None
    for the isotropic law."""
    law = m.hardening
    if isinstance(law, QuadraticHardening):
        return -np.einsum("...b,ab->...a", gamma, law.matrix)
    if isinstance(law, PragerHardening):
        p_sym = sym(basis.apply(gamma))
        return -m.elastic.mu * law.k1 * basis.project(p_sym)
    return None


def resolved_stresses(s: State, m: MaterialParams, basis: SlipBasis,
                      spec: GridSpec):
    """Driving stresses per slip system.

    Returns ``(tau, g)``: ``tau`` resolves the Eshelby-type stress on each
    system plus the local kinematic backstress; ``g`` is the conjugate of
    the isotropic hardening variable (None for kinematic laws).  Resolving
    against the deviatoric stress gives the same values because the
    orientation dyads are traceless.
    """
    tau = basis.project(eshelby_stress(s, m, basis, spec))
    s_loc = local_backstress(s.gamma, m, basis)
    if s_loc is not None:
        tau = tau + s_loc
    g = None
    if m.is_isotropic:
        g = -m.elastic.mu * m.hardening.k2 * s.eta
    return tau, g


@dataclass(frozen=True)
class DerivedState:
    p: np.ndarray
    eps_p: np.ndarray
    sigma: np.ndarray
    alpha: np.ndarray
    Sigma_E: np.ndarray
    tau: np.ndarray
    g: Optional[np.ndarray]


def derived_state(s: State, m: MaterialParams, basis: SlipBasis,
                  spec: GridSpec) -> DerivedState:
    """All fields computed from a state in one pass."""
    p = basis.apply(s.gamma)
    sigma = m.elastic.apply(sym(grad(s.u, spec) - p))
    alpha = curl(p, spec)
    if m.L_c == 0.0:
        big_sigma = sigma
    else:
        big_sigma = sigma - m.elastic.mu * m.L_c ** 2 * curl_adjoint(alpha, spec)
    tau = basis.project(big_sigma)
    s_loc = local_backstress(s.gamma, m, basis)
    if s_loc is not None:
        tau = tau + s_loc
    g = -m.elastic.mu * m.hardening.k2 * s.eta if m.is_isotropic else None
    return DerivedState(p=p, eps_p=sym(p), sigma=sigma, alpha=alpha,
                        Sigma_E=big_sigma, tau=tau, g=g)


def yield_function(tau, g, m: MaterialParams):
    """Yield value; admissible iff <= 0 (isotropic additionally needs the
    hardening force g <= 0, which holds whenever eta >= 0)."""
    if m.is_isotropic:
        if g is None:
            raise DimensionMismatch("isotropic yield needs the hardening force g")
        return np.abs(tau) + g - m.sigma0
    return np.abs(tau) - m.sigma0


def dissipation_density(q: float, beta: float, m: MaterialParams) -> float:
    """Pointwise dissipation for one system; positively one-homogeneous.

    Isotropic: ``sigma0 |q|`` when ``|q| <= beta``, infinite otherwise.
    Kinematic laws ignore ``beta``.
    """
    if m.is_isotropic and abs(q) > beta:
        return np.inf
    return m.sigma0 * abs(q)


def dissipation_increment(dgamma: np.ndarray, deta: Optional[np.ndarray],
                          m: MaterialParams, spec: GridSpec,
                          feasibility_tol: float = 1e-12) -> float:
    """Integrated dissipation of one increment.

    For the isotropic law the increment must satisfy ``|dgamma| <= deta``
    componentwise (up to rounding), else the dissipation is infinite.
    """
    if m.is_isotropic:
        if deta is None:
            raise DimensionMismatch("isotropic dissipation needs the eta increment")
        gap = np.abs(dgamma) - deta
        scale = max(1.0, float(np.max(np.abs(dgamma)) if dgamma.size else 0.0))
        if np.any(gap > feasibility_tol * scale):
            return np.inf
    return m.sigma0 * spec.cell_volume * float(np.sum(np.abs(dgamma)))


@dataclass(frozen=True)
class EnergyBreakdown:
    elastic: float
    defect: float
    hardening: float

    @property
    def total(self) -> float:
        return self.elastic + self.defect + self.hardening


def free_energy(s: State, m: MaterialParams, basis: SlipBasis,
                spec: GridSpec) -> EnergyBreakdown:
    """Stored energy split into elastic, defect, and hardening parts."""
    check_state(s, spec, basis, m)
    e_sym = sym(grad(s.u, spec) - basis.apply(s.gamma))
    elastic = 0.5 * l2_inner(e_sym, m.elastic.apply(e_sym), spec)
    mu = m.elastic.mu
    defect = 0.0
    if m.L_c > 0.0:
        a = curl(basis.apply(s.gamma), spec)
        defect = 0.5 * mu * m.L_c ** 2 * l2_inner(a, a, spec)
    law = m.hardening
    if isinstance(law, IsotropicHardening):
        hard = 0.5 * mu * law.k2 * l2_inner(s.eta, s.eta, spec)
    elif isinstance(law, QuadraticHardening):
        hg = np.einsum("...b,ab->...a", s.gamma, law.matrix)
        hard = 0.5 * l2_inner(hg, s.gamma, spec)
    else:
        ps = sym(basis.apply(s.gamma))
        hard = 0.5 * mu * law.k1 * l2_inner(ps, ps, spec)
    return EnergyBreakdown(elastic=elastic, defect=defect, hardening=hard)


def bilinear_a(w, z, m: MaterialParams, basis: SlipBasis,
               spec: GridSpec) -> float:
    """Symmetric bilinear form of the weak formulation.

    ``w`` and ``z`` are ``(u, gamma, eta)`` triples (eta entries ignored
    for kinematic laws).  Equals twice the free energy on the diagonal.
    """
    uw, gw, ew = w
    uz, gz, ez = z
    ew_sym = sym(grad(uw, spec) - basis.apply(gw))
    ez_sym = sym(grad(uz, spec) - basis.apply(gz))
    val = l2_inner(m.elastic.apply(ew_sym), ez_sym, spec)
    mu = m.elastic.mu
    if m.L_c > 0.0:
        val += mu * m.L_c ** 2 * l2_inner(
            curl(basis.apply(gw), spec), curl(basis.apply(gz), spec), spec)
    law = m.hardening
    if isinstance(law, IsotropicHardening):
        val += mu * law.k2 * l2_inner(ew, ez, spec)
    elif isinstance(law, QuadraticHardening):
        val += l2_inner(np.einsum("...b,ab->...a", gw, law.matrix), gz, spec)
    else:
        val += mu * law.k1 * l2_inner(
            sym(basis.apply(gw)), sym(basis.apply(gz)), spec)
    return val


def load_pairing(f: np.ndarray, v: np.ndarray, spec: GridSpec) -> float:
    """Body-force work pairing, the linear functional of the weak form."""
    check_field(f, "vec3", spec)
    check_field(v, "vec3", spec)
    return l2_inner(f, v, spec)
