"""Independent oracles and analytic benchmarks.

Everything here validates the solver without sharing its solution path:

* :func:`oracle_active_set` enumerates all sign patterns of the slip
  increment on tiny instances and solves the resulting linear optimality
  systems, a guaranteed global minimizer by convexity;
* :func:`oracle_smoothed` Huberizes the nonsmooth terms, minimizes with
  accelerated gradient descent, and Richardson-extrapolates the smoothing
  parameter to zero;
* :func:`analytic_single_slip` is the closed-form homogeneous shear
  solution, cross-checked by a scalar return-mapping iteration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .algebra import ElasticModuli, SlipBasis, SlipSystem, sym
from .constitutive import (
    IsotropicHardening,
    MaterialParams,
    QuadraticHardening,
    State,
    hardening_stiffness,
    zero_state,
)
from .errors import NoConsistentPattern, NonMonotoneLoad, ValidationError
from .grid import GridSpec, curl, grad, zeros_field
from .solver import (
    LoadProgram,
    SolverConfig,
    run_evolution,
)

__all__ = [
    "TinyProblem",
    "random_tiny_problem",
    "oracle_active_set",
    "oracle_smoothed",
    "analytic_single_slip",
    "return_map_single_slip",
    "golden_min",
    "shear_benchmark_scenario",
    "run_shear_benchmark",
    "BenchmarkResult",
]

MAX_TINY_CELLS = 4
MAX_TINY_SLIP = 2
MAX_TINY_DOF = 8

FACES_ALL = ("x-", "x+", "y-", "y+", "z-", "z+")


@dataclass(frozen=True)
class TinyProblem:
    """One incremental step small enough for exhaustive enumeration."""

    spec: GridSpec
    basis: SlipBasis
    m: MaterialParams
    prev: State
    f: np.ndarray
    dirichlet: np.ndarray

    def __post_init__(self):
        if self.spec.n_cells > MAX_TINY_CELLS:
            raise ValidationError(
                f"tiny problems allow at most {MAX_TINY_CELLS} cells, "
                f"got {self.spec.n_cells}")
        if self.basis.n_slip > MAX_TINY_SLIP:
            raise ValidationError(
                f"tiny problems allow at most {MAX_TINY_SLIP} slip systems")
        if self.spec.n_cells * self.basis.n_slip > MAX_TINY_DOF:
            raise ValidationError(
                f"slip degrees of freedom exceed the enumeration bound "
                f"{MAX_TINY_DOF}")


@dataclass
class _TinyAssembly:
    """Dense materialization of the incremental functional.

    Unknowns are ``z = (free displacement dofs, slip increments)``; the
    smooth part is the exact quadratic ``z^T Q z / 2 + c^T z + e`` (volume
    weight dropped, applied when reporting energies).
    """

    tp: TinyProblem
    n_u: int
    n_d: int
    q0: np.ndarray
    c0: np.ndarray
    e0: float
    free_cells: np.ndarray  # (n_free, 3) indices
    eta_prev: np.ndarray  # (n_d,) for isotropic, else None

    def state_from(self, z: np.ndarray) -> State:
        tp = self.tp
        u = zeros_field("vec3", tp.spec)
        mask = tp.spec.dirichlet_cell_mask()
        u[mask] = tp.dirichlet[mask]
        for k, (ix, iy, iz) in enumerate(self.free_cells):
            u[ix, iy, iz] = z[3 * k:3 * k + 3]
        d = z[self.n_u:].reshape(tp.spec.shape + (tp.basis.n_slip,))
        gamma = tp.prev.gamma + d
        eta = None
        if tp.m.is_isotropic:
            eta = tp.prev.eta + np.abs(d)
        return State(u, gamma, eta)

    def smooth_value_grad(self, z):
        g = self.q0 @ z + self.c0
        val = 0.5 * float(z @ self.q0 @ z) + float(self.c0 @ z) + self.e0
        return val, g


def _assemble_tiny(tp: TinyProblem) -> _TinyAssembly:
    spec, basis, m = tp.spec, tp.basis, tp.m
    mask = spec.dirichlet_cell_mask()
    free_cells = np.argwhere(~mask)
    n_u = 3 * len(free_cells)
    n_d = spec.n_cells * basis.n_slip
    n_z = n_u + n_d

    def strain_of(u_field, gamma_field):
        return sym(grad(u_field, spec) - basis.apply(gamma_field)).ravel()

    # strain map is affine in z, eps(z) = A z + a0; the operators are linear
    # so unit-vector application yields the columns directly
    zero_g = np.zeros(spec.shape + (basis.n_slip,))
    zero_u = zeros_field("vec3", spec)
    u_base = zeros_field("vec3", spec)
    u_base[mask] = tp.dirichlet[mask]
    a0 = strain_of(u_base, tp.prev.gamma)
    cols = []
    for ix, iy, iz in free_cells:
        for comp in range(3):
            u = zeros_field("vec3", spec)
            u[ix, iy, iz, comp] = 1.0
            cols.append(strain_of(u, zero_g))
    for cell in np.ndindex(spec.shape):
        for a in range(basis.n_slip):
            gf = np.zeros(spec.shape + (basis.n_slip,))
            gf[cell + (a,)] = 1.0
            cols.append(strain_of(zero_u, gf))
    a_mat = np.stack(cols, axis=1) if n_z else np.zeros((a0.size, 0))

    # elasticity as a 9x9 block applied per cell
    c9 = np.stack([m.elastic.apply(e.reshape(3, 3)).ravel()
                   for e in np.eye(9)], axis=1)
    c_big = np.kron(np.eye(spec.n_cells), c9)

    q0 = a_mat.T @ c_big @ a_mat
    c0 = a_mat.T @ (c_big @ a0)
    e0 = 0.5 * float(a0 @ c_big @ a0)

    if m.L_c > 0.0:
        b0 = curl(basis.apply(tp.prev.gamma), spec).ravel()
        b_cols = []
        for cell in np.ndindex(spec.shape):
            for a in range(basis.n_slip):
                gf = np.zeros(spec.shape + (basis.n_slip,))
                gf[cell + (a,)] = 1.0
                b_cols.append(curl(basis.apply(gf), spec).ravel())
        b_mat = np.zeros((b0.size, n_z))
        b_mat[:, n_u:] = np.stack(b_cols, axis=1)
        w = m.elastic.mu * m.L_c ** 2
        q0 = q0 + w * (b_mat.T @ b_mat)
        c0 = c0 + w * (b_mat.T @ b0)
        e0 = e0 + 0.5 * w * float(b0 @ b0)

    if not m.is_isotropic:
        h = hardening_stiffness(m, basis)
        h_big = np.kron(np.eye(spec.n_cells), h)
        g_prev = tp.prev.gamma.ravel()
        q0[n_u:, n_u:] += h_big
        c0[n_u:] += h_big @ g_prev
        e0 += 0.5 * float(g_prev @ h_big @ g_prev)

    # body load, dropped volume weight to match the rest
    f_flat = tp.f
    for k, (ix, iy, iz) in enumerate(free_cells):
        c0[3 * k:3 * k + 3] -= f_flat[ix, iy, iz]
    e0 -= float(np.sum(tp.f * u_base))

    eta_prev = tp.prev.eta.ravel().copy() if m.is_isotropic else None
    return _TinyAssembly(tp=tp, n_u=n_u, n_d=n_d, q0=q0, c0=c0, e0=e0,
                         free_cells=free_cells, eta_prev=eta_prev)


def _pattern_objective(asm: _TinyAssembly, z: np.ndarray) -> float:
    """Full incremental objective (volume weight dropped)."""
    m = asm.tp.m
    val, _ = asm.smooth_value_grad(z)
    d = z[asm.n_u:]
    val += m.sigma0 * float(np.sum(np.abs(d)))
    if m.is_isotropic:
        eta = asm.eta_prev + np.abs(d)
        val += 0.5 * m.elastic.mu * m.hardening.k2 * float(eta @ eta)
    return val


def oracle_active_set(tp: TinyProblem) -> Tuple[State, float]:
    """Global minimizer of one incremental step by sign enumeration.

    For each sign pattern of the slip increments the absolute values
    become linear, the stationarity system is solved exactly, and the
    candidate is kept when it is consistent with its pattern.  The least
    consistent energy is the global minimum by convexity.  Returns the
    state and the volume-weighted incremental energy.
    """
    asm = _assemble_tiny(tp)
    m = tp.m
    mu_k2 = m.elastic.mu * m.hardening.k2 if m.is_isotropic else 0.0
    sigma0 = m.sigma0
    n_u, n_d = asm.n_u, asm.n_d
    best = None
    tol = 1e-9

    for pattern in itertools.product((-1, 0, 1), repeat=n_d):
        s = np.array(pattern, dtype=float)
        active = np.nonzero(s)[0]
        keep = np.concatenate([np.arange(n_u), n_u + active])
        q = asm.q0[np.ix_(keep, keep)].copy()
        c = asm.c0[keep].copy()
        for j, dj in enumerate(active):
            row = n_u + j
            c[row] += sigma0 * s[dj]
            if m.is_isotropic:
                q[row, row] += mu_k2
                c[row] += mu_k2 * asm.eta_prev[dj] * s[dj]
        try:
            z_keep = np.linalg.solve(q, -c)
        except np.linalg.LinAlgError:
            z_keep, *_ = np.linalg.lstsq(q, -c, rcond=None)
        z = np.zeros(n_u + n_d)
        z[keep] = z_keep

        d = z[n_u:]
        ok = True
        for j in active:
            if s[j] * d[j] < -tol:
                ok = False
                break
        if ok:
            grad_smooth = asm.q0 @ z + asm.c0
            for j in range(n_d):
                if s[j] != 0.0:
                    continue
                thr = sigma0 + (mu_k2 * asm.eta_prev[j] if m.is_isotropic else 0.0)
                if abs(grad_smooth[n_u + j]) > thr * (1.0 + 1e-9) + 1e-12:
                    ok = False
                    break
        if not ok:
            continue
        energy = _pattern_objective(asm, z)
        if best is None or energy < best[0] - 1e-15:
            best = (energy, z)

    if best is None:
        raise NoConsistentPattern(
            "no sign pattern was self-consistent; the instance or the "
            "assembly is broken")
    energy, z = best
    vol = tp.spec.cell_volume
    return asm.state_from(z), energy * vol


# ---------------------------------------------------------------------------
# smoothed oracle
# ---------------------------------------------------------------------------

def _huber(x, eps):
    ax = np.abs(x)
    return np.where(ax <= eps, 0.5 * x * x / eps, ax - 0.5 * eps)


def _huber_prime(x, eps):
    return np.clip(x / eps, -1.0, 1.0)


def _agd_minimize(value_grad, z0, grad_tol, max_iter=100000, stagnation=500):
    """Accelerated gradient descent with backtracking and restarts.

    Stops when the gradient norm falls below ``grad_tol`` scaled by the
    current curvature estimate (the raw tolerance sits below the rounding
    floor of stiff smoothed objectives), or when the objective stagnates.
    """
    z = z0.copy()
    f_z, g_z = value_grad(z)
    lip = max(1.0, float(np.linalg.norm(g_z)))
    y = z.copy()
    tk = 1.0
    best = f_z
    since_best = 0
    restarts = 0
    for _ in range(max_iter):
        f_y, g_y = value_grad(y)
        gn = float(np.linalg.norm(g_y))
        tol_eff = grad_tol * max(1.0, lip * (1.0 + float(np.linalg.norm(y))))
        if gn <= tol_eff:
            z = y
            break
        while True:
            cand = y - g_y / lip
            f_cand, _ = value_grad(cand)
            if f_cand <= f_y - 0.5 * gn * gn / lip + 1e-18 * (1.0 + abs(f_y)):
                break
            lip *= 2.0
        if f_cand > f_z:
            restarts += 1
            if restarts > 3:
                break
            y = z.copy()
            tk = 1.0
            continue
        restarts = 0
        tk1 = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = cand + ((tk - 1.0) / tk1) * (cand - z)
        z, f_z, tk = cand, f_cand, tk1
        lip *= 0.9
        if f_z < best - 1e-17 * (1.0 + abs(best)):
            best = f_z
            since_best = 0
        else:
            since_best += 1
            if since_best > stagnation:
                break
    return z


def _neville_at_zero(xs: Sequence[float], ys: List[np.ndarray]) -> np.ndarray:
    t = [y.copy() for y in ys]
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            denom = xs[i + level] - xs[i]
            t[i] = (xs[i + level] * t[i] - xs[i] * t[i + 1]) / denom
    return t[0]


def oracle_smoothed(tp: TinyProblem,
                    eps_list: Sequence[float] = (1e-3, 5e-4, 2.5e-4),
                    grad_tol: float = 1e-12) -> Tuple[State, float]:
    """Huber-smoothed minimization with extrapolation to zero smoothing.

    Each smoothed problem is solved by accelerated gradient descent to a
    tiny gradient norm (warm-started down the ``eps_list``); the minimizer
    sequence is then polynomial-extrapolated to ``eps = 0``.  Returns the
    extrapolated state and the exact incremental energy at it.
    """
    eps_list = list(eps_list)
    if len(eps_list) < 3 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValidationError("eps_list must be decreasing with >= 3 entries")
    asm = _assemble_tiny(tp)
    m = tp.m
    sigma0 = m.sigma0
    mu_k2 = m.elastic.mu * m.hardening.k2 if m.is_isotropic else 0.0
    n_u = asm.n_u

    def make_value_grad(eps):
        def value_grad(z):
            val, g = asm.smooth_value_grad(z)
            d = z[n_u:]
            hb = _huber(d, eps)
            hp = _huber_prime(d, eps)
            val += sigma0 * float(np.sum(hb))
            g = g.copy()
            g[n_u:] += sigma0 * hp
            if m.is_isotropic:
                eta = asm.eta_prev + hb
                val += 0.5 * mu_k2 * float(eta @ eta)
                g[n_u:] += mu_k2 * eta * hp
            return val, g
        return value_grad

    z = np.zeros(asm.n_u + asm.n_d)
    minimizers = []
    for eps in eps_list:
        z = _agd_minimize(make_value_grad(eps), z, grad_tol)
        minimizers.append(z.copy())
    z_star = _neville_at_zero(eps_list, minimizers)
    energy = _pattern_objective(asm, z_star) * tp.spec.cell_volume
    return asm.state_from(z_star), energy


def smoothed_energy_sequence(tp: TinyProblem, eps_list, grad_tol=1e-12):
    """Minimum values of the smoothed objectives, in eps_list order."""
    asm = _assemble_tiny(tp)
    m = tp.m
    sigma0 = m.sigma0
    mu_k2 = m.elastic.mu * m.hardening.k2 if m.is_isotropic else 0.0
    vals = []
    z = np.zeros(asm.n_u + asm.n_d)
    for eps in eps_list:
        def value_grad(zz, eps=eps):
            val, g = asm.smooth_value_grad(zz)
            d = zz[asm.n_u:]
            hb = _huber(d, eps)
            hp = _huber_prime(d, eps)
            val += sigma0 * float(np.sum(hb))
            g = g.copy()
            g[asm.n_u:] += sigma0 * hp
            if m.is_isotropic:
                eta = asm.eta_prev + hb
                val += 0.5 * mu_k2 * float(eta @ eta)
                g[asm.n_u:] += mu_k2 * eta * hp
            return val, g
        z = _agd_minimize(value_grad, z, grad_tol)
        vals.append(value_grad(z)[0] * tp.spec.cell_volume)
    return vals


# ---------------------------------------------------------------------------
# random tiny instances
# ---------------------------------------------------------------------------

def _random_orthonormal_pair(rng):
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    return q[:, 0], q[:, 1]


def random_tiny_problem(rng: np.random.Generator, hardening: str = "isotropic",
                        n_slip: int = 1, with_curl: bool = True) -> TinyProblem:
    """Randomized 2x2x1 instance with a mix of elastic and plastic cells."""
    spec = GridSpec(2, 2, 1, h=0.5, dirichlet_faces=frozenset(("x-",)),
                    hard_faces=frozenset())
    systems = [SlipSystem(*_random_orthonormal_pair(rng)) for _ in range(n_slip)]
    basis = SlipBasis(systems)
    elastic = ElasticModuli(mu=1.0, lam=0.7)
    sigma0 = float(rng.uniform(0.05, 0.15))
    l_c = float(rng.uniform(0.2, 0.6)) if with_curl else 0.0
    if hardening == "isotropic":
        law = IsotropicHardening(k2=float(rng.uniform(0.1, 0.6)))
    elif hardening == "quadratic":
        r = rng.standard_normal((n_slip, n_slip))
        law = QuadraticHardening(r @ r.T + 0.2 * np.eye(n_slip))
    else:
        raise ValidationError(f"unknown tiny hardening family {hardening!r}")
    m = MaterialParams(elastic=elastic, L_c=l_c, sigma0=sigma0, hardening=law)

    prev = zero_state(spec, basis, m)
    prev.gamma[...] = 0.2 * rng.standard_normal(prev.gamma.shape)
    if m.is_isotropic:
        prev.eta[...] = np.abs(prev.gamma) + rng.uniform(
            0.0, 0.1, size=prev.eta.shape)

    f = rng.normal(0.0, 2.5 * sigma0, size=spec.shape + (3,))
    dirichlet = rng.normal(0.0, 0.08, size=spec.shape + (3,))
    return TinyProblem(spec=spec, basis=basis, m=m, prev=prev, f=f,
                       dirichlet=dirichlet)


# ---------------------------------------------------------------------------
# scalar oracles
# ---------------------------------------------------------------------------

def golden_min(fn, lo: float, hi: float, tol: float = 1e-13,
               dps: Optional[int] = None) -> float:
    """Golden-section minimizer of a scalar unimodal function.

    In float64 the bracket cannot localize a flat quadratic minimum better
    than about the square root of machine epsilon; passing ``dps`` runs
    the search in mpmath arithmetic at that precision instead, which is
    what the tight prox comparisons use (``fn`` must accept mpf inputs).
    """
    if dps is not None:
        import mpmath

        with mpmath.workdps(dps):
            inv_phi = (mpmath.sqrt(5) - 1) / 2
            a, b = mpmath.mpf(lo), mpmath.mpf(hi)
            c = b - inv_phi * (b - a)
            d = a + inv_phi * (b - a)
            fc, fd = fn(c), fn(d)
            while b - a > tol:
                if fc <= fd:
                    b, d, fd = d, c, fc
                    c = b - inv_phi * (b - a)
                    fc = fn(c)
                else:
                    a, c, fc = c, d, fd
                    d = a + inv_phi * (b - a)
                    fd = fn(d)
            return float((a + b) / 2)
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def analytic_single_slip(g_of_t: Sequence[float], m: MaterialParams):
    """Closed-form slips for monotone homogeneous simple shear.

    Single system (e1, e2), isotropic hardening, shear amplitude history
    ``g_of_t`` nondecreasing from zero.  Returns ``(gamma, eta)`` arrays;
    they coincide under monotone loading.
    """
    if not m.is_isotropic:
        raise ValidationError("the closed form is for the isotropic law")
    g = np.asarray(g_of_t, dtype=float)
    if g.size == 0 or g[0] < 0.0 or np.any(np.diff(g) < 0.0):
        raise NonMonotoneLoad("shear history must be nondecreasing from 0")
    mu, k2, sigma0 = m.elastic.mu, m.hardening.k2, m.sigma0
    gamma = np.maximum(0.0, mu * g - sigma0) / (mu * (1.0 + k2))
    return gamma, gamma.copy()


def return_map_single_slip(g_of_t: Sequence[float], m: MaterialParams):
    """Scalar predictor-corrector solution of the same shear history.

    Independent of the closed form: per step, the trial resolved stress is
    tested against the current yield radius and the consistency equation is
    solved for the slip increment.
    """
    if not m.is_isotropic:
        raise ValidationError("the return map is for the isotropic law")
    mu, k2, sigma0 = m.elastic.mu, m.hardening.k2, m.sigma0
    gamma = 0.0
    eta = 0.0
    out = []
    for g in np.asarray(g_of_t, dtype=float):
        tau_trial = mu * (g - gamma)
        radius = sigma0 + mu * k2 * eta
        phi = abs(tau_trial) - radius
        if phi > 0.0:
            d = math.copysign(phi / (mu * (1.0 + k2)), tau_trial)
            gamma += d
            eta += abs(d)
        out.append((gamma, eta))
    arr = np.array(out)
    return arr[:, 0], arr[:, 1]


# ---------------------------------------------------------------------------
# homogeneous shear benchmark
# ---------------------------------------------------------------------------

def shear_profile(spec: GridSpec, amplitude: float) -> np.ndarray:
    """Simple-shear displacement anchored at the phantom layer above the
    top face, so the one-sided strain is exact at every cell."""
    u = zeros_field("vec3", spec)
    iy = np.arange(spec.ny)
    u[..., 0] = amplitude * spec.h * (iy - spec.ny)[None, :, None]
    return u


def shear_benchmark_scenario(n: int = 8, steps: int = 50, mu: float = 1.0,
                             lam: float = 1.0, sigma0: float = 0.01,
                             k2: float = 0.1, g_max: float = 0.03,
                             cfg: Optional[SolverConfig] = None):
    """Homogeneous single-slip shear driven through Dirichlet data.

    Displacement is prescribed on all six faces; the tangential slip
    constraint acts only on the shear faces, where the plane normal is
    parallel to the face normal and the kernel-mode constraint is void, so
    the slips stay unconstrained and spatially uniform.  The length scale
    is zero: for homogeneous states the curl terms vanish identically and
    the full solver must reproduce the scalar closed form.
    """
    spec = GridSpec(n, n, n, h=1.0 / n,
                    dirichlet_faces=frozenset(FACES_ALL),
                    hard_faces=frozenset(("y-", "y+")))
    basis = SlipBasis([SlipSystem((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))])
    m = MaterialParams(elastic=ElasticModuli(mu=mu, lam=lam), L_c=0.0,
                       sigma0=sigma0, hardening=IsotropicHardening(k2=k2))
    times = np.linspace(0.0, 1.0, steps + 1)
    amplitudes = g_max * times
    dirichlet = tuple(shear_profile(spec, a) for a in amplitudes)
    load = LoadProgram(times=times, dirichlet_values=dirichlet)
    if cfg is None:
        cfg = SolverConfig(tol_kkt=1e-8, cg_tol=1e-12)
    return spec, basis, m, load, cfg, amplitudes


@dataclass(frozen=True)
class BenchmarkResult:
    max_gamma_error: float
    max_kkt: float
    max_stability_gap: float
    min_dissipation: float
    amplitudes: np.ndarray
    gamma_analytic: np.ndarray
    gamma_numeric: np.ndarray


def run_shear_benchmark(n: int = 8, steps: int = 50,
                        cfg: Optional[SolverConfig] = None,
                        gamma_init: Optional[np.ndarray] = None,
                        **scenario_kwargs) -> BenchmarkResult:
    """Run the shear scenario and compare against the closed form."""
    spec, basis, m, load, default_cfg, amplitudes = shear_benchmark_scenario(
        n=n, steps=steps, **scenario_kwargs)
    cfg = cfg or default_cfg
    results = run_evolution(m, basis, spec, load, cfg, gamma_init=gamma_init)
    gamma_exact, _ = analytic_single_slip(amplitudes[1:], m)
    gamma_err = 0.0
    kkt = 0.0
    stab = -np.inf
    diss = np.inf
    gamma_num = []
    for (state, report), g_ref in zip(results, gamma_exact):
        gamma_err = max(gamma_err, float(np.max(np.abs(state.gamma - g_ref))))
        kkt = max(kkt, report.kkt.worst)
        stab = max(stab, report.stability_gap)
        diss = min(diss, report.dissipation_increment)
        gamma_num.append(float(np.mean(state.gamma)))
    return BenchmarkResult(max_gamma_error=gamma_err, max_kkt=kkt,
                           max_stability_gap=stab, min_dissipation=diss,
                           amplitudes=amplitudes[1:],
                           gamma_analytic=gamma_exact,
                           gamma_numeric=np.array(gamma_num))
