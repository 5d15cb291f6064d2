"""Time-incremental solution of the quasi-static evolution.

Each time step minimizes the convex incremental functional

    E_n(u, gamma) = stored energy + sigma0 * ||gamma - gamma_prev||_L1
                    - <body load, u>

over the displacement-Dirichlet affine space and the trace-constrained slip
space, by alternating an exact conjugate-gradient displacement solve with an
accelerated proximal-gradient slip update.  For the isotropic law the
hardening variables are eliminated exactly (eta = eta_prev + |dgamma|) so the
slip block has a closed-form scalar prox.

Per-cell arithmetic drops the uniform cell-volume weight; it cancels from
every optimality condition.  Reported energies are volume-weighted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from . import _backend as K
from .algebra import SlipBasis, sym
from .constitutive import (
    EnergyBreakdown,
    IsotropicHardening,
    MaterialParams,
    State,
    bilinear_a,
    dissipation_increment,
    free_energy,
    hardening_stiffness,
    load_pairing,
    resolved_stresses,
    validate_model,
    yield_function,
    zero_state,
)
from .errors import CGStall, DimensionMismatch, InvalidModel, NonConvergence, ValidationError
from .grid import (
    GridSpec,
    TraceConstraint,
    build_trace_constraint,
    check_field,
    curl,
    curl_adjoint,
    grad,
    grad_adjoint,
    l2_inner,
    zeros_field,
)

__all__ = [
    "SolverConfig",
    "LoadProgram",
    "KKTResiduals",
    "StepReport",
    "prox_scalar_iso",
    "prox_scalar_kin",
    "eliminate_eta",
    "power_iteration_norm",
    "lipschitz_estimate",
    "displacement_solve",
    "slip_update",
    "kkt_residual",
    "incremental_step",
    "run_evolution",
    "CoercivityBound",
    "predicted_coercivity",
    "coercivity_probe",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and caps for the incremental solver."""

    tol_energy: float = 1e-10
    tol_kkt: float = 1e-6
    max_outer: int = 500
    max_cg: Optional[int] = None  # default 10 * sqrt(n_dof), set at solve time
    cg_tol: float = 1e-10
    fista_restart: bool = True
    max_fista: int = 500
    trace_mode: str = "kernel"

    def __post_init__(self):
        for name in ("tol_energy", "tol_kkt", "cg_tol"):
            if not (getattr(self, name) > 0.0):
                raise ValidationError(f"solver.{name} must be > 0")
        if self.max_outer < 1 or self.max_fista < 1:
            raise ValidationError("iteration caps must be >= 1")
        if self.trace_mode not in ("kernel", "hard-zero"):
            raise ValidationError(
                f"trace_mode must be 'kernel' or 'hard-zero', got {self.trace_mode!r}")


@dataclass(frozen=True)
class LoadProgram:
    """Loading history: body force schedule and Dirichlet displacement data.

    ``times`` starts at 0 (the zero initial state) and is strictly
    increasing.  ``body_scales`` multiply the body-force template per time
    node; ``dirichlet_values`` is one full displacement field per time node,
    read only at Dirichlet cells.
    """

    times: np.ndarray
    body_force: Optional[np.ndarray] = None
    body_scales: Optional[np.ndarray] = None
    dirichlet_values: Optional[tuple] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValidationError("load.times needs at least two nodes")
        if t[0] != 0.0:
            raise ValidationError(f"load.times must start at 0, got {t[0]}")
        if np.any(np.diff(t) <= 0.0):
            raise ValidationError("load.times must be strictly increasing")
        object.__setattr__(self, "times", t)
        if self.body_scales is not None:
            s = np.asarray(self.body_scales, dtype=float)
            if s.shape != t.shape:
                raise ValidationError(
                    f"body_scales has {s.size} entries for {t.size} time nodes")
            if not np.all(np.isfinite(s)):
                raise ValidationError("body_scales must be finite")
            object.__setattr__(self, "body_scales", s)
        if self.dirichlet_values is not None:
            dv = tuple(self.dirichlet_values)
            if len(dv) != t.size:
                raise ValidationError(
                    f"dirichlet_values has {len(dv)} fields for {t.size} time nodes")
            object.__setattr__(self, "dirichlet_values", dv)

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    def body_force_at(self, n: int, spec: GridSpec) -> np.ndarray:
        if self.body_force is None:
            return zeros_field("vec3", spec)
        scale = 1.0 if self.body_scales is None else float(self.body_scales[n])
        return scale * self.body_force

    def dirichlet_at(self, n: int, spec: GridSpec) -> np.ndarray:
        if self.dirichlet_values is None:
            return zeros_field("vec3", spec)
        return self.dirichlet_values[n]


@dataclass(frozen=True)
class KKTResiduals:
    """Normalized optimality residuals of one converged (or not) step.

    All entries are dimensionless; feasibility, complementarity and
    alignment are relative to the initial yield stress.
    """

    feasibility: float
    complementarity: float
    alignment: float
    eta_consistency: float

    @property
    def worst(self) -> float:
        return max(self.feasibility, self.complementarity, self.alignment,
                   self.eta_consistency)


@dataclass(frozen=True)
class StepReport:
    step: int
    time: float
    outer_iterations: int
    cg_iterations: int
    energy: EnergyBreakdown
    dissipation_increment: float
    external_work_increment: float
    kkt: KKTResiduals
    stability_gap: float

    CSV_COLUMNS = ("step", "time", "outer_iterations", "cg_iterations",
                   "elastic_energy", "defect_energy", "hardening_energy",
                   "dissipation_increment", "external_work_increment",
                   "kkt_feasibility", "kkt_complementarity", "kkt_alignment",
                   "kkt_eta_consistency", "stability_gap")

    @staticmethod
    def csv_header() -> str:
        return ",".join(StepReport.CSV_COLUMNS)

    def csv_row(self) -> str:
        vals = (self.step, format(self.time, ".17g"), self.outer_iterations,
                self.cg_iterations,
                format(self.energy.elastic, ".17g"),
                format(self.energy.defect, ".17g"),
                format(self.energy.hardening, ".17g"),
                format(self.dissipation_increment, ".17g"),
                format(self.external_work_increment, ".17g"),
                format(self.kkt.feasibility, ".17g"),
                format(self.kkt.complementarity, ".17g"),
                format(self.kkt.alignment, ".17g"),
                format(self.kkt.eta_consistency, ".17g"),
                format(self.stability_gap, ".17g"))
        return ",".join(str(v) for v in vals)


# ---------------------------------------------------------------------------
# scalar proximal maps
# ---------------------------------------------------------------------------

def prox_scalar_iso(x: float, t: float, sigma0: float, mu_k2: float,
                    eta_prev: float) -> float:
    """Minimizer of ``(d-x)^2/(2t) + sigma0|d| + mu_k2 (eta_prev+|d|)^2 / 2``.

    Exactly at the threshold the elastic branch (d = 0) is returned, keeping
    the map single-valued.
    """
    mag = abs(x) - t * (sigma0 + mu_k2 * eta_prev)
    if mag <= 0.0:
        return 0.0
    return math.copysign(mag / (1.0 + t * mu_k2), x)


def prox_scalar_kin(x: float, t: float, sigma0: float) -> float:
    """Soft threshold at ``t * sigma0``."""
    mag = abs(x) - t * sigma0
    if mag <= 0.0:
        return 0.0
    return math.copysign(mag, x)


def eliminate_eta(dgamma: np.ndarray, eta_prev: np.ndarray) -> np.ndarray:
    """Optimal hardening update ``eta = eta_prev + |dgamma|``.

    The rate constraint forces eta increments to dominate |dgamma| and the
    hardening energy grows in eta, so equality is optimal.
    """
    return eta_prev + np.abs(dgamma)


# ---------------------------------------------------------------------------
# slip-block quadratic operator and its norm
# ---------------------------------------------------------------------------

def _slip_block_apply(d: np.ndarray, m: MaterialParams, basis: SlipBasis,
                      spec: GridSpec, kin_matrix: Optional[np.ndarray]) -> np.ndarray:
    """Hessian of the smooth slip-block energy applied to a slip field."""
    p = basis.apply(d)
    out = basis.project(2.0 * m.elastic.mu * sym(p))
    if m.L_c > 0.0:
        out += (m.elastic.mu * m.L_c ** 2) * basis.project(
            curl_adjoint(curl(p, spec), spec))
    if kin_matrix is not None:
        out += np.einsum("...b,ab->...a", d, kin_matrix)
    return out


def power_iteration_norm(apply_op, shape, n_iter: int = 50, seed: int = 0) -> float:
    """Largest-eigenvalue estimate of a symmetric PSD operator by power
    iteration from a seeded random start."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(shape)
    nrm = float(np.linalg.norm(v.ravel()))
    if nrm == 0.0:
        return 0.0
    v /= nrm
    lam = 0.0
    for _ in range(n_iter):
        w = apply_op(v)
        lam = float(np.linalg.norm(w.ravel()))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return lam


def lipschitz_estimate(m: MaterialParams, basis: SlipBasis, spec: GridSpec,
                       n_iter: int = 50, seed: int = 0,
                       margin: float = 1.1) -> float:
    """Upper bound on the largest eigenvalue of the slip-block operator,
    inflated by a safety margin so the proximal-gradient step length 1/L
    stays conservative."""
    kin = None if m.is_isotropic else hardening_stiffness(m, basis)
    lam = power_iteration_norm(
        lambda v: _slip_block_apply(v, m, basis, spec, kin),
        spec.shape + (basis.n_slip,), n_iter=n_iter, seed=seed)
    return margin * lam


# ---------------------------------------------------------------------------
# conjugate gradients on the displacement block
# ---------------------------------------------------------------------------

def _condition_estimate(alphas, betas) -> float:
    """Spectral condition estimate from the CG Lanczos coefficients."""
    k = len(alphas)
    if k == 0:
        return 1.0
    t = np.zeros((k, k))
    for i in range(k):
        t[i, i] = 1.0 / alphas[i]
        if i > 0:
            t[i, i] += betas[i - 1] / alphas[i - 1]
            off = math.sqrt(betas[i - 1]) / alphas[i - 1]
            t[i, i - 1] = off
            t[i - 1, i] = off
    ev = np.linalg.eigvalsh(t)
    lo = max(ev[0], _EPS)
    return float(ev[-1] / lo)


def _cg(apply_op, b, tol: float, max_iter: int, stall_window: int = 50):
    """Plain conjugate gradients from a zero start.

    Raises :class:`CGStall` when the relative residual plateaus (less than
    1% reduction across the stall window) or the cap is reached.
    """
    x = np.zeros_like(b)
    r = b.copy()
    b_norm = float(np.linalg.norm(b.ravel()))
    if b_norm == 0.0:
        return x, 0
    p = r.copy()
    rs = float(np.dot(r.ravel(), r.ravel()))
    alphas: List[float] = []
    betas: List[float] = []
    history = [math.sqrt(rs) / b_norm]
    for it in range(1, max_iter + 1):
        ap = apply_op(p)
        denom = float(np.dot(p.ravel(), ap.ravel()))
        if denom <= 0.0:
            raise CGStall("operator lost positive definiteness",
                          _condition_estimate(alphas, betas))
        alpha = rs / denom
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.dot(r.ravel(), r.ravel()))
        rel = math.sqrt(rs_new) / b_norm
        history.append(rel)
        alphas.append(alpha)
        if rel <= tol:
            return x, it
        beta = rs_new / rs
        betas.append(beta)
        p = r + beta * p
        rs = rs_new
        if it >= stall_window and history[-1] > 0.99 * history[-1 - stall_window]:
            raise CGStall(
                f"residual plateau at {rel:.3e} after {it} iterations",
                _condition_estimate(alphas, betas))
    raise CGStall(
        f"iteration cap {max_iter} reached at relative residual {history[-1]:.3e}",
        _condition_estimate(alphas, betas))


def displacement_solve(gamma: np.ndarray, m: MaterialParams, basis: SlipBasis,
                       spec: GridSpec, f: np.ndarray,
                       dirichlet: Optional[np.ndarray],
                       cfg: SolverConfig) -> Tuple[np.ndarray, int]:
    """Solve the displacement block at fixed slip.

    Dirichlet cells are eliminated: their values are prescribed and the
    conjugate-gradient iteration runs on the complementary degrees of
    freedom, keeping the operator symmetric positive definite.
    Returns ``(u, cg_iterations)``.
    """
    check_field(gamma, "slip", spec, basis.n_slip)
    check_field(f, "vec3", spec)
    mask = spec.dirichlet_cell_mask()
    u_d = zeros_field("vec3", spec)
    if dirichlet is not None:
        check_field(dirichlet, "vec3", spec)
        u_d[mask] = dirichlet[mask]

    def apply_a(v):
        r = grad_adjoint(m.elastic.apply(sym(grad(v, spec))), spec)
        r[mask] = 0.0
        return r

    p = basis.apply(gamma)
    rhs = f - grad_adjoint(m.elastic.apply(sym(grad(u_d, spec)) - sym(p)), spec)
    rhs[mask] = 0.0
    n_free = 3 * int(np.sum(~mask))
    if n_free == 0:
        return u_d, 0
    max_cg = cfg.max_cg or max(100, int(10.0 * math.sqrt(n_free)))
    x, iters = _cg(apply_a, rhs, cfg.cg_tol, max_cg)
    return u_d + x, iters


# ---------------------------------------------------------------------------
# slip block: accelerated proximal gradient
# ---------------------------------------------------------------------------

class _SlipBlock:
    """Per-cell smooth energy, gradient, and prox of the slip subproblem."""

    def __init__(self, u, gamma_prev, eta_prev, m, basis, spec, tc):
        self.m = m
        self.basis = basis
        self.spec = spec
        self.tc = tc
        self.gamma_prev = gamma_prev
        self.eta_prev = eta_prev
        self.mu = m.elastic.mu
        self.iso = m.is_isotropic
        self.kin = None if self.iso else hardening_stiffness(m, basis)
        self.elastic_strain = sym(grad(u, spec))  # sym grad of fixed u

    def smooth_energy(self, gamma):
        m = self.m
        e = self.elastic_strain - sym(self.basis.apply(gamma))
        val = 0.5 * float(np.sum(m.elastic.apply(e) * e))
        if m.L_c > 0.0:
            a = curl(self.basis.apply(gamma), self.spec)
            val += 0.5 * self.mu * m.L_c ** 2 * float(np.sum(a * a))
        if self.kin is not None:
            hg = np.einsum("...b,ab->...a", gamma, self.kin)
            val += 0.5 * float(np.sum(hg * gamma))
        return val

    def smooth_grad(self, gamma):
        m = self.m
        e = self.elastic_strain - sym(self.basis.apply(gamma))
        g = -self.basis.project(m.elastic.apply(e))
        if m.L_c > 0.0:
            g += (self.mu * m.L_c ** 2) * self.basis.project(
                curl_adjoint(curl(self.basis.apply(gamma), self.spec), self.spec))
        if self.kin is not None:
            g += np.einsum("...b,ab->...a", gamma, self.kin)
        return g

    def nonsmooth(self, d):
        m = self.m
        val = m.sigma0 * float(np.sum(np.abs(d)))
        if self.iso:
            eta = self.eta_prev + np.abs(d)
            val += 0.5 * self.mu * m.hardening.k2 * float(np.sum(eta * eta))
        return val

    def objective(self, d):
        return self.smooth_energy(self.gamma_prev + d) + self.nonsmooth(d)

    def prox(self, x, t):
        m = self.m
        if self.iso:
            return K.prox_iso_sweep(x, t, m.sigma0, self.mu * m.hardening.k2,
                                    self.eta_prev)
        return K.prox_kin_sweep(x, t, m.sigma0)

    def prox_step(self, d, t):
        """One plain proximal-gradient step from d, trace-projected."""
        g = self.smooth_grad(self.gamma_prev + d)
        cand = self.prox(d - t * g, t)
        self.tc.apply_inplace(cand)
        return cand


def slip_update(u: np.ndarray, gamma_start: np.ndarray, gamma_prev: np.ndarray,
                eta_prev: Optional[np.ndarray], m: MaterialParams,
                basis: SlipBasis, spec: GridSpec, cfg: SolverConfig,
                tc: TraceConstraint, lipschitz: float,
                grad_target: Optional[float] = None) -> np.ndarray:
    """Minimize the slip block at fixed displacement.

    Monotone accelerated proximal gradient on the increment against the
    previous step's slips; momentum restarts whenever the objective would
    rise.  Terminates when the relative objective decrease falls below
    ``tol_energy`` and the composite gradient mapping is below
    ``grad_target`` (defaults to half the KKT tolerance in stress units).
    """
    block = _SlipBlock(u, gamma_prev, eta_prev, m, basis, spec, tc)
    t = 1.0 / max(lipschitz, _EPS)
    if grad_target is None:
        grad_target = 0.5 * cfg.tol_kkt * m.sigma0

    d = gamma_start - gamma_prev
    tc.apply_inplace(d)
    d_old = d
    tk = 1.0
    f_cur = block.objective(d)
    scale = max(1.0, abs(f_cur))
    for _ in range(cfg.max_fista):
        tk1 = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = d + ((tk - 1.0) / tk1) * (d - d_old)
        cand = block.prox_step(y, t)
        f_cand = block.objective(cand)
        if f_cand > f_cur and cfg.fista_restart:
            cand = block.prox_step(d, t)
            f_cand = block.objective(cand)
            tk1 = 1.0
        d_old, d, tk = d, cand, tk1
        decrease = f_cur - f_cand
        f_cur = f_cand
        if decrease <= cfg.tol_energy * scale:
            # candidate exit: confirm the gradient mapping is small too
            nxt = block.prox_step(d, t)
            gmap = float(np.max(np.abs(nxt - d))) / t if d.size else 0.0
            if gmap <= grad_target:
                d = nxt
                break
            f_cur = block.objective(nxt)
            d_old = d
            d = nxt
            tk = 1.0
    return gamma_prev + d


# ---------------------------------------------------------------------------
# optimality residuals
# ---------------------------------------------------------------------------

def kkt_residual(state: State, dgamma: np.ndarray, m: MaterialParams,
                 basis: SlipBasis, spec: GridSpec,
                 deta: Optional[np.ndarray] = None,
                 free_mask: Optional[np.ndarray] = None) -> KKTResiduals:
    """Normalized complementarity-system residuals at a state.

    ``free_mask`` restricts the check to slip components the trace
    constraint leaves free; constrained components carry reaction terms and
    are exempt from the pointwise conditions.
    """
    tau, g = resolved_stresses(state, m, basis, spec)
    phi = yield_function(tau, g, m)
    if free_mask is None:
        free_mask = np.ones(phi.shape, dtype=bool)
    phi_f = phi[free_mask]
    dg_f = dgamma[free_mask]
    tau_f = tau[free_mask]
    sigma0 = m.sigma0

    feas = float(np.max(np.maximum(phi_f, 0.0), initial=0.0)) / sigma0
    dg_inf = float(np.max(np.abs(dg_f), initial=0.0))
    comp = float(np.max(np.abs(dg_f) * np.abs(phi_f), initial=0.0)) / (
        sigma0 * dg_inf + _EPS)
    align_num = np.abs(dg_f) * np.abs(tau_f) - dg_f * tau_f
    align = float(np.max(align_num / (sigma0 * np.abs(dg_f) + _EPS), initial=0.0))
    eta_c = 0.0
    if m.is_isotropic and deta is not None:
        eta_c = float(np.max(np.abs(deta - np.abs(dgamma)), initial=0.0))
    return KKTResiduals(feasibility=feas, complementarity=comp,
                        alignment=align, eta_consistency=eta_c)


# ---------------------------------------------------------------------------
# one incremental step and the full evolution
# ---------------------------------------------------------------------------

def _incremental_energy(state: State, prev: State, f: np.ndarray,
                        m: MaterialParams, basis: SlipBasis,
                        spec: GridSpec) -> float:
    dgamma = state.gamma - prev.gamma
    deta = None
    if m.is_isotropic:
        deta = state.eta - prev.eta
    diss = dissipation_increment(dgamma, deta, m, spec)
    return (free_energy(state, m, basis, spec).total
            - load_pairing(f, state.u, spec) + diss)


def incremental_step(prev: State, f: np.ndarray, dirichlet: Optional[np.ndarray],
                     m: MaterialParams, basis: SlipBasis, spec: GridSpec,
                     cfg: SolverConfig, tc: Optional[TraceConstraint] = None,
                     lipschitz: Optional[float] = None,
                     gamma_init: Optional[np.ndarray] = None,
                     step_index: int = 1, time: float = 0.0,
                     prev_external_work: float = 0.0) -> Tuple[State, StepReport]:
    """Minimize one incremental functional from the previous state.

    Alternates the displacement and slip block solves until the energy
    settles and every optimality residual falls below the tolerance.
    Raises :class:`NonConvergence` (with the last report attached) when the
    outer cap is hit first.
    """
    validate_model(m, basis)
    if tc is None:
        tc = build_trace_constraint(basis, spec, cfg.trace_mode)
    if lipschitz is None:
        lipschitz = lipschitz_estimate(m, basis, spec)
    free_mask = tc.free_component_mask()

    u, cg_total = displacement_solve(prev.gamma, m, basis, spec, f, dirichlet, cfg)
    predictor = State(u, prev.gamma.copy(),
                      None if prev.eta is None else prev.eta.copy())
    e_predictor = _incremental_energy(predictor, prev, f, m, basis, spec)

    gamma = prev.gamma.copy() if gamma_init is None else gamma_init.copy()
    tc.apply_inplace(gamma)
    e_last = None
    state = predictor
    kkt = None
    outer = 0
    for outer in range(1, cfg.max_outer + 1):
        gamma = slip_update(u, gamma, prev.gamma, prev.eta, m, basis, spec,
                            cfg, tc, lipschitz)
        u, cg_it = displacement_solve(gamma, m, basis, spec, f, dirichlet, cfg)
        cg_total += cg_it
        dgamma = gamma - prev.gamma
        eta = eliminate_eta(dgamma, prev.eta) if m.is_isotropic else None
        state = State(u, gamma, eta)
        e_cur = _incremental_energy(state, prev, f, m, basis, spec)
        deta = None if eta is None else eta - prev.eta
        kkt = kkt_residual(state, dgamma, m, basis, spec, deta=deta,
                           free_mask=free_mask)
        settled = (e_last is not None
                   and e_last - e_cur <= cfg.tol_energy * max(1.0, abs(e_cur)))
        e_last = e_cur
        if settled and kkt.worst <= cfg.tol_kkt:
            break
    else:
        report = _make_report(state, prev, f, m, basis, spec, kkt, outer,
                              cg_total, e_last, e_predictor, step_index, time,
                              prev_external_work)
        raise NonConvergence(
            f"step {step_index}: outer cap {cfg.max_outer} hit with KKT "
            f"residual {kkt.worst:.3e} (tolerance {cfg.tol_kkt:.1e})", report)

    report = _make_report(state, prev, f, m, basis, spec, kkt, outer, cg_total,
                          e_last, e_predictor, step_index, time,
                          prev_external_work)
    return state, report


def _make_report(state, prev, f, m, basis, spec, kkt, outer, cg_total,
                 e_final, e_predictor, step_index, time, prev_external_work):
    dgamma = state.gamma - prev.gamma
    deta = None if state.eta is None else state.eta - prev.eta
    energy = free_energy(state, m, basis, spec)
    diss = dissipation_increment(dgamma, deta, m, spec)
    work = load_pairing(f, state.u, spec) - prev_external_work
    return StepReport(step=step_index, time=time, outer_iterations=outer,
                      cg_iterations=cg_total, energy=energy,
                      dissipation_increment=diss,
                      external_work_increment=work, kkt=kkt,
                      stability_gap=e_final - e_predictor)


def run_evolution(m: MaterialParams, basis: SlipBasis, spec: GridSpec,
                  load: LoadProgram, cfg: SolverConfig,
                  gamma_init: Optional[np.ndarray] = None
                  ) -> List[Tuple[State, StepReport]]:
    """Run the whole loading program from the zero initial state.

    Returns one ``(state, report)`` pair per time step (the initial state
    is not included).  ``gamma_init`` seeds the first step's inner solve,
    which is how distinct-initialization uniqueness probes are run.
    """
    validate_model(m, basis)
    tc = build_trace_constraint(basis, spec, cfg.trace_mode)
    lipschitz = lipschitz_estimate(m, basis, spec)
    state = zero_state(spec, basis, m)
    out = []
    work_acc = 0.0
    for n in range(1, load.n_steps + 1):
        f_n = load.body_force_at(n, spec)
        d_n = load.dirichlet_at(n, spec)
        init = gamma_init if n == 1 else None
        state, report = incremental_step(
            state, f_n, d_n, m, basis, spec, cfg, tc=tc, lipschitz=lipschitz,
            gamma_init=init, step_index=n, time=float(load.times[n]),
            prev_external_work=work_acc)
        work_acc += report.external_work_increment
        out.append((state, report))
    return out


# ---------------------------------------------------------------------------
# coercivity: predicted bound and sampled Rayleigh quotients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoercivityBound:
    constant: float
    theta: float
    includes_curl: bool


def _golden_max(fn, lo: float, hi: float, iters: int = 200) -> Tuple[float, float]:
    """Golden-section maximization of a unimodal function on (lo, hi)."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if b - a < 1e-14:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _hardening_half_constant(m: MaterialParams, basis: SlipBasis) -> float:
    law = m.hardening
    if isinstance(law, IsotropicHardening):
        return 0.5 * m.elastic.mu * law.k2
    return float(np.linalg.eigvalsh(hardening_stiffness(m, basis))[0])


def predicted_coercivity(m: MaterialParams, basis: SlipBasis) -> CoercivityBound:
    """Algebraic coercivity constant of the bilinear form.

    Evaluates ``min(m0(1-theta), k + m0(1-1/theta), k, mu Lc^2)`` at the
    best splitting parameter in the admissible window
    ``m0/(m0+k) < theta < 1``; ``k`` is half the isotropic hardening
    modulus or the smallest eigenvalue of the kinematic stiffness.  With
    ``L_c = 0`` the curl cap is dropped and the bound applies to the
    reduced seminorm without the curl term.
    """
    m0 = m.elastic.m0
    k_half = _hardening_half_constant(m, basis)
    if not (k_half > 0.0):
        raise InvalidModel(
            f"hardening constant {k_half:.3e} leaves an empty splitting window")
    lo = m0 / (m0 + k_half)

    def chain(theta):
        return min(m0 * (1.0 - theta), k_half + m0 * (1.0 - 1.0 / theta))

    theta, val = _golden_max(chain, lo, 1.0)
    include_curl = m.L_c > 0.0
    c = min(val, k_half)
    if include_curl:
        c = min(c, m.elastic.mu * m.L_c ** 2)
    return CoercivityBound(constant=c, theta=theta, includes_curl=include_curl)


def coercivity_probe(m: MaterialParams, basis: SlipBasis, spec: GridSpec,
                     n_samples: int, seed: int,
                     extra_samples: Optional[list] = None) -> float:
    """Smallest sampled Rayleigh quotient of the bilinear form.

    Draws random admissible triples (displacement zeroed at Dirichlet
    cells, slips trace-projected, isotropic hardening rates dominating the
    slip rates) and measures ``a(z, z)`` against the seminorm
    ``|sym grad v|^2 + |q|^2 (+ |beta|^2) (+ |curl(p(q))|^2)``; the curl
    term is omitted when ``L_c = 0``, matching the reduced predicted bound.
    ``extra_samples`` lets callers append hand-built probe directions.
    """
    if n_samples < 1:
        raise ValidationError("coercivity probe needs n_samples >= 1")
    tc = build_trace_constraint(basis, spec, "kernel")
    rng = np.random.default_rng(seed)
    mask = spec.dirichlet_cell_mask()
    iso = m.is_isotropic
    worst = np.inf

    def quotient(v, q, beta):
        z = (v, q, beta)
        a_val = bilinear_a(z, z, m, basis, spec)
        sgv = sym(grad(v, spec))
        n_val = l2_inner(sgv, sgv, spec) + l2_inner(q, q, spec)
        if beta is not None:
            n_val += l2_inner(beta, beta, spec)
        if m.L_c > 0.0:
            c = curl(basis.apply(q), spec)
            n_val += l2_inner(c, c, spec)
        if n_val <= 0.0:
            return np.inf
        return a_val / n_val

    samples = []
    for _ in range(n_samples):
        v = rng.standard_normal(spec.shape + (3,))
        v[mask] = 0.0
        q = rng.standard_normal(spec.shape + (basis.n_slip,))
        tc.apply_inplace(q)
        beta = None
        if iso:
            beta = np.maximum(np.abs(rng.standard_normal(q.shape)), np.abs(q))
        samples.append((v, q, beta))
    if extra_samples:
        samples.extend(extra_samples)
    for v, q, beta in samples:
        worst = min(worst, quotient(v, q, beta))
    return float(worst)
