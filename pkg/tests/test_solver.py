import numpy as np
import pytest

from gradplast.algebra import ElasticModuli, SlipBasis, SlipSystem
from gradplast.constitutive import (
    IsotropicHardening,
    MaterialParams,
    PragerHardening,
    QuadraticHardening,
    dissipation_increment,
    free_energy,
    load_pairing,
    resolved_stresses,
    zero_state,
)
from gradplast.errors import CGStall, InvalidModel, NonConvergence
from gradplast.grid import GridSpec, build_trace_constraint, l2_inner, zeros_field
from gradplast.solver import (
    LoadProgram,
    SolverConfig,
    coercivity_probe,
    displacement_solve,
    eliminate_eta,
    incremental_step,
    kkt_residual,
    lipschitz_estimate,
    power_iteration_norm,
    predicted_coercivity,
    prox_scalar_iso,
    prox_scalar_kin,
    run_evolution,
    slip_update,
)
from gradplast.verify import (
    golden_min,
    return_map_single_slip,
    shear_benchmark_scenario,
    shear_profile,
)

E3 = np.eye(3)


def single_basis():
    return SlipBasis([SlipSystem(E3[0], E3[1])])


def iso_params(**kw):
    args = dict(mu=1.0, lam=0.8, l_c=0.0, sigma0=0.01, k2=0.1)
    args.update(kw)
    return MaterialParams(ElasticModuli(args["mu"], args["lam"]),
                          L_c=args["l_c"], sigma0=args["sigma0"],
                          hardening=IsotropicHardening(args["k2"]))


class TestProxScalars:
    def test_iso_threshold_and_limit(self):
        assert prox_scalar_iso(0.05, 1.0, 0.1, 0.3, 0.0) == 0.0
        # exactly at threshold: elastic branch
        assert prox_scalar_iso(0.1, 1.0, 0.1, 0.0, 0.0) == 0.0
        # vanishing hardening reduces to plain soft threshold
        for x in (-1.3, 0.4, 2.0):
            assert prox_scalar_iso(x, 0.7, 0.1, 0.0, 0.5) == pytest.approx(
                prox_scalar_kin(x, 0.7, 0.1), abs=1e-16)

    def test_kin_zero_threshold_is_identity(self):
        assert prox_scalar_kin(0.37, 2.0, 0.0) == 0.37

    def test_random_against_golden_section(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = float(rng.normal(0, 2))
            t = float(rng.uniform(0.05, 4.0))
            s0 = float(rng.uniform(0.01, 1.0))
            mu_k2 = float(rng.uniform(0, 2.0))
            eta = float(rng.uniform(0, 1.5))
            d = prox_scalar_iso(x, t, s0, mu_k2, eta)

            def obj(v):
                return (0.5 * (v - x) ** 2 / t + s0 * abs(v)
                        + 0.5 * mu_k2 * (eta + abs(v)) ** 2)

            ref = golden_min(obj, min(0, x) - 1, max(0, x) + 1, dps=40)
            assert abs(d - ref) <= 1e-10


class TestEliminateEta:
    def test_unchanged_for_zero_increment(self):
        eta = np.array([0.1, 0.2])
        assert np.array_equal(eliminate_eta(np.zeros(2), eta), eta)

    def test_monotone(self):
        rng = np.random.default_rng(2)
        eta = np.abs(rng.standard_normal(10))
        d = rng.standard_normal(10)
        assert np.all(eliminate_eta(d, eta) >= eta)


class TestPowerIteration:
    def test_zero_operator(self):
        assert power_iteration_norm(lambda v: 0.0 * v, (4, 3)) == 0.0

    def test_diagonal_operator_recovers_top_entry(self):
        diag = np.array([0.3, 2.7, 1.1, 0.9])
        est = power_iteration_norm(lambda v: diag * v, (4,), n_iter=100)
        assert est == pytest.approx(2.7, rel=1e-2)

    def test_estimate_dominates_rayleigh_probes(self):
        spec = GridSpec(4, 4, 4, h=0.25, dirichlet_faces=frozenset(("x-",)))
        basis, m = single_basis(), iso_params(l_c=0.5)
        lip = lipschitz_estimate(m, basis, spec)
        from gradplast.solver import _slip_block_apply
        rng = np.random.default_rng(3)
        for _ in range(20):
            v = rng.standard_normal(spec.shape + (1,))
            quad = float(np.sum(_slip_block_apply(v, m, basis, spec, None) * v))
            assert quad <= lip * float(np.sum(v * v)) + 1e-12

    def test_uniform_single_system_block_is_diagonal(self):
        # elastic-only slip Hessian is mu per cell for a unit dyad system
        spec = GridSpec(3, 3, 3, h=1 / 3, dirichlet_faces=frozenset(("x-",)))
        basis, m = single_basis(), iso_params(l_c=0.0)
        lip = lipschitz_estimate(m, basis, spec, margin=1.0)
        assert lip == pytest.approx(m.elastic.mu, rel=1e-2)


class TestDisplacementSolve:
    def test_unloaded_is_zero(self):
        spec = GridSpec(4, 4, 4, h=0.25, dirichlet_faces=frozenset(("x-",)))
        basis, m = single_basis(), iso_params()
        cfg = SolverConfig()
        u, iters = displacement_solve(np.zeros(spec.shape + (1,)), m, basis,
                                      spec, zeros_field("vec3", spec), None, cfg)
        assert np.max(np.abs(u)) == 0.0 and iters == 0

    def test_fully_framed_homogeneous_shear(self):
        spec, basis, m, _, cfg, _ = shear_benchmark_scenario(n=6, steps=2)
        gamma = np.full(spec.shape + (1,), 0.004)
        dirichlet = shear_profile(spec, 0.02)
        u, _ = displacement_solve(gamma, m, basis, spec,
                                  zeros_field("vec3", spec), dirichlet, cfg)
        assert np.max(np.abs(u - dirichlet)) <= 1e-9

    def test_residual_contract(self):
        from gradplast.algebra import sym
        from gradplast.grid import grad, grad_adjoint
        spec = GridSpec(5, 4, 4, h=0.2, dirichlet_faces=frozenset(("x-", "x+")))
        basis, m = single_basis(), iso_params()
        rng = np.random.default_rng(4)
        f = 0.01 * rng.standard_normal(spec.shape + (3,))
        gamma = 0.01 * rng.standard_normal(spec.shape + (1,))
        cfg = SolverConfig(cg_tol=1e-11)
        u, _ = displacement_solve(gamma, m, basis, spec, f, None, cfg)
        resid = f - grad_adjoint(
            m.elastic.apply(sym(grad(u, spec)) - sym(basis.apply(gamma))), spec)
        mask = spec.dirichlet_cell_mask()
        resid[mask] = 0.0
        # contract is relative to the eliminated system's right-hand side,
        # which includes the plastic eigenstrain term
        rhs = f - grad_adjoint(m.elastic.apply(-sym(basis.apply(gamma))), spec)
        rhs[mask] = 0.0
        rhs_scale = float(np.linalg.norm(rhs.ravel()))
        assert float(np.linalg.norm(resid.ravel())) <= cfg.cg_tol * rhs_scale

    def test_cg_cap_raises_with_condition_estimate(self):
        spec = GridSpec(5, 5, 5, h=0.2, dirichlet_faces=frozenset(("x-",)))
        basis, m = single_basis(), iso_params()
        rng = np.random.default_rng(5)
        f = rng.standard_normal(spec.shape + (3,))
        cfg = SolverConfig(max_cg=2)
        with pytest.raises(CGStall) as exc:
            displacement_solve(np.zeros(spec.shape + (1,)), m, basis, spec,
                               f, None, cfg)
        assert exc.value.condition_estimate >= 1.0


class TestSlipUpdate:
    def test_elastic_fixed_point(self):
        # all resolved stresses inside the threshold: slips unchanged
        spec, basis, m, _, cfg, _ = shear_benchmark_scenario(n=4, steps=2)
        tc = build_trace_constraint(basis, spec, cfg.trace_mode)
        lip = lipschitz_estimate(m, basis, spec)
        u = shear_profile(spec, 0.5 * m.sigma0 / m.elastic.mu)
        prev = zero_state(spec, basis, m)
        out = slip_update(u, prev.gamma, prev.gamma, prev.eta, m, basis, spec,
                          cfg, tc, lip)
        assert np.array_equal(out, prev.gamma)

    def test_single_cell_reduction_matches_scalar_prox(self):
        spec = GridSpec(1, 1, 1, h=1.0, dirichlet_faces=frozenset(("x-",)),
                        hard_faces=frozenset())
        basis, m = single_basis(), iso_params(k2=0.4, sigma0=0.05)
        tc = build_trace_constraint(basis, spec, "kernel")
        lip = lipschitz_estimate(m, basis, spec)
        prev_gamma = np.full(spec.shape + (1,), -0.3)
        eta_prev = np.full(spec.shape + (1,), 0.05)
        u = zeros_field("vec3", spec)
        cfg = SolverConfig(tol_energy=1e-15, max_fista=3000, tol_kkt=1e-10)
        out = slip_update(u, prev_gamma, prev_gamma, eta_prev, m, basis, spec,
                          cfg, tc, lip)
        mu = m.elastic.mu
        ref = prox_scalar_iso(0.0 - prev_gamma[0, 0, 0, 0], 1.0 / mu, m.sigma0,
                              mu * m.hardening.k2, eta_prev[0, 0, 0, 0])
        assert out[0, 0, 0, 0] - prev_gamma[0, 0, 0, 0] == pytest.approx(
            ref, abs=1e-10)


class TestIncrementalStep:
    def test_below_yield_is_purely_elastic(self):
        spec, basis, m, _, cfg, _ = shear_benchmark_scenario(n=4, steps=2)
        prev = zero_state(spec, basis, m)
        dirichlet = shear_profile(spec, 0.5 * m.sigma0 / m.elastic.mu)
        state, rep = incremental_step(prev, zeros_field("vec3", spec),
                                      dirichlet, m, basis, spec, cfg)
        assert np.max(np.abs(state.gamma)) == 0.0
        assert rep.dissipation_increment == 0.0
        assert rep.kkt.worst <= cfg.tol_kkt

    def test_nonconvergence_attaches_report(self):
        spec, basis, m, load, cfg, _ = shear_benchmark_scenario(n=4, steps=2)
        prev = zero_state(spec, basis, m)
        tight = SolverConfig(max_outer=1, max_fista=1, tol_kkt=1e-14,
                             tol_energy=1e-16)
        with pytest.raises(NonConvergence) as exc:
            incremental_step(prev, zeros_field("vec3", spec),
                             load.dirichlet_at(2, spec), m, basis, spec, tight)
        assert exc.value.report is not None
        assert exc.value.report.kkt.worst > 1e-14

    def test_prager_with_coupled_systems_rejected(self):
        spec = GridSpec(4, 4, 4, h=0.25, dirichlet_faces=frozenset(("x-",)))
        basis = SlipBasis([SlipSystem(E3[0], E3[1]), SlipSystem(E3[0], E3[2])])
        m = MaterialParams(ElasticModuli(1.0, 1.0), L_c=0.1, sigma0=0.1,
                           hardening=PragerHardening(0.5))
        prev = zero_state(spec, basis, m)
        with pytest.raises(InvalidModel):
            incremental_step(prev, zeros_field("vec3", spec), None, m, basis,
                             spec, SolverConfig())


class TestEvolution:
    def test_zero_load_program(self):
        spec = GridSpec(4, 4, 4, h=0.25, dirichlet_faces=frozenset(("x-",)))
        basis, m = single_basis(), iso_params()
        load = LoadProgram(times=np.linspace(0, 1, 4))
        out = run_evolution(m, basis, spec, load, SolverConfig())
        for state, rep in out:
            assert np.max(np.abs(state.u)) == 0.0
            assert np.max(np.abs(state.gamma)) == 0.0
            assert rep.dissipation_increment == 0.0

    def test_matches_scalar_return_map(self):
        spec, basis, m, load, cfg, amps = shear_benchmark_scenario(n=4, steps=12)
        out = run_evolution(m, basis, spec, load, cfg)
        gamma_ref, eta_ref = return_map_single_slip(amps[1:], m)
        for (state, _), g_ref, e_ref in zip(out, gamma_ref, eta_ref):
            assert np.max(np.abs(state.gamma - g_ref)) <= 1e-8
            assert np.max(np.abs(state.eta - e_ref)) <= 1e-8

    def test_rate_independence_under_refinement(self):
        _, _, _, _, cfg, _ = shear_benchmark_scenario(n=4, steps=2)
        runs = {}
        for steps in (6, 12):
            spec, basis, m, load, _, _ = shear_benchmark_scenario(n=4, steps=steps)
            out = run_evolution(m, basis, spec, load, cfg)
            runs[steps] = out[-1][0]
        scale = max(1.0, float(np.max(np.abs(runs[6].gamma))))
        assert np.max(np.abs(runs[6].gamma - runs[12].gamma)) <= 1e-8 * scale
        assert np.max(np.abs(runs[6].u - runs[12].u)) <= 1e-8

    def test_eta_monotone_and_dissipation_sign(self):
        spec, basis, m, load, cfg, _ = shear_benchmark_scenario(n=4, steps=8)
        out = run_evolution(m, basis, spec, load, cfg)
        prev_eta = np.zeros_like(out[0][0].eta)
        for state, rep in out:
            assert np.all(state.eta >= prev_eta - 1e-15)
            assert np.all(state.eta >= 0.0)
            assert rep.dissipation_increment >= 0.0
            assert rep.stability_gap <= 1e-10
            prev_eta = state.eta

    def test_reduced_dissipation_inequality(self):
        # conjugate-force pairing with the increment stays nonnegative
        spec, basis, m, load, cfg, _ = shear_benchmark_scenario(n=4, steps=8)
        out = run_evolution(m, basis, spec, load, cfg)
        prev = zero_state(spec, basis, m)
        for state, _ in out:
            tau, g = resolved_stresses(state, m, basis, spec)
            dgamma = state.gamma - prev.gamma
            deta = state.eta - prev.eta
            total = l2_inner(tau, dgamma, spec) + l2_inner(g, deta, spec)
            dg_norm = np.sqrt(l2_inner(dgamma, dgamma, spec))
            assert total >= -1e-8 * m.sigma0 * dg_norm
            prev = state

    def test_body_force_program_stability_against_previous_state(self):
        # static Dirichlet data keeps the previous state admissible, so the
        # literal incremental-minimality comparison applies
        spec = GridSpec(4, 4, 4, h=0.25,
                        dirichlet_faces=frozenset(("x-", "x+", "y-", "y+",
                                                   "z-", "z+")))
        basis, m = single_basis(), iso_params(sigma0=0.002)
        f = zeros_field("vec3", spec)
        f[..., 0] = 1.0
        times = np.linspace(0, 1, 7)
        load = LoadProgram(times=times, body_force=f,
                           body_scales=0.06 * times)
        cfg = SolverConfig(tol_kkt=1e-8)
        out = run_evolution(m, basis, spec, load, cfg)
        assert any(np.max(np.abs(s.gamma)) > 1e-6 for s, _ in out)
        prev = zero_state(spec, basis, m)
        for n, (state, rep) in enumerate(out, start=1):
            f_n = load.body_force_at(n, spec)

            def inc_energy(s):
                dgamma = s.gamma - prev.gamma
                deta = s.eta - prev.eta
                return (free_energy(s, m, basis, spec).total
                        - load_pairing(f_n, s.u, spec)
                        + dissipation_increment(dgamma, deta, m, spec))

            e_new = inc_energy(state)
            e_prev = inc_energy(prev)
            assert e_new <= e_prev + 1e-10 * max(1.0, abs(e_new))
            prev = state

    def test_uniqueness_probe_two_initializations(self):
        spec, basis, m, load, cfg, _ = shear_benchmark_scenario(n=4, steps=6)
        out_a = run_evolution(m, basis, spec, load, cfg)
        rng = np.random.default_rng(6)
        init = 0.01 * rng.standard_normal(spec.shape + (1,))
        out_b = run_evolution(m, basis, spec, load, cfg, gamma_init=init)
        ga, gb = out_a[-1][0].gamma, out_b[-1][0].gamma
        scale = max(1.0, float(np.max(np.abs(ga))))
        assert np.max(np.abs(ga - gb)) <= 1e-6 * scale


class TestKKTResidual:
    def test_elastic_state_zero_residuals(self):
        spec, basis, m = (GridSpec(4, 4, 4, h=0.25,
                                   dirichlet_faces=frozenset(("y-",))),
                          single_basis(), iso_params())
        s = zero_state(spec, basis, m)
        res = kkt_residual(s, np.zeros_like(s.gamma), m, basis, spec,
                           deta=np.zeros_like(s.eta))
        assert res.worst == 0.0

    def test_hand_built_on_surface_state(self):
        # uniform shear exactly at the hardened yield surface with an
        # aligned increment: every residual vanishes
        spec, basis, m, _, _, _ = shear_benchmark_scenario(n=4, steps=2)
        mu, k2, s0 = m.elastic.mu, m.hardening.k2, m.sigma0
        g_amp = 3.0 * s0 / mu
        gam = (mu * g_amp - s0) / (mu * (1 + k2))
        s = zero_state(spec, basis, m)
        s.u[...] = shear_profile(spec, g_amp)
        s.gamma[...] = gam
        s.eta[...] = gam
        dgamma = np.full_like(s.gamma, gam)
        res = kkt_residual(s, dgamma, m, basis, spec, deta=dgamma)
        assert res.worst <= 1e-10


class TestCoercivity:
    def triple(self):
        return SlipBasis([SlipSystem(E3[0], E3[1]), SlipSystem(E3[1], E3[2]),
                          SlipSystem(E3[2], E3[0])])

    def test_window_collapse_as_hardening_vanishes(self):
        c_small = predicted_coercivity(iso_params(k2=1e-7, l_c=1.0),
                                       self.triple()).constant
        c_large = predicted_coercivity(iso_params(k2=1.0, l_c=1.0),
                                       self.triple()).constant
        assert 0.0 < c_small < 1e-6 < c_large

    def test_homogeneity_under_parameter_doubling(self):
        b = self.triple()
        m1 = iso_params(mu=1.0, lam=0.5, k2=0.4, l_c=0.7)
        m2 = iso_params(mu=2.0, lam=1.0, k2=0.4, l_c=0.7)
        c1 = predicted_coercivity(m1, b)
        c2 = predicted_coercivity(m2, b)
        assert c2.constant == pytest.approx(2.0 * c1.constant, rel=1e-9)

    def test_theta_strictly_inside_window(self):
        m = iso_params(k2=0.4, l_c=0.7)
        bound = predicted_coercivity(m, self.triple())
        m0 = m.elastic.m0
        k_half = 0.5 * m.elastic.mu * m.hardening.k2
        assert m0 / (m0 + k_half) < bound.theta < 1.0

    def test_empty_window_rejected(self):
        # reciprocal systems make the Prager stiffness singular
        basis = SlipBasis([SlipSystem(E3[0], E3[1]), SlipSystem(E3[1], E3[0])])
        m = MaterialParams(ElasticModuli(1.0, 1.0), L_c=0.5, sigma0=0.1,
                           hardening=PragerHardening(1.0))
        with pytest.raises(InvalidModel):
            predicted_coercivity(m, basis)

    def test_probe_dominates_bound(self):
        spec = GridSpec(6, 6, 6, h=1 / 6, dirichlet_faces=frozenset(("x-",)))
        m = iso_params(k2=0.3, l_c=0.5)
        bound = predicted_coercivity(m, self.triple())
        probe = coercivity_probe(m, self.triple(), spec, 100, seed=3)
        assert probe >= bound.constant > 0.0

    def test_plastic_spin_null_direction_collapses_without_hardening(self):
        # reciprocal systems carry a uniform pure-spin slip mode invisible
        # to the symmetrized plastic strain: with vanishing isotropic
        # hardening the quotient at that mode goes to zero
        basis = SlipBasis([SlipSystem(E3[0], E3[1]), SlipSystem(E3[1], E3[0])])
        spec = GridSpec(6, 6, 6, h=1 / 6, dirichlet_faces=frozenset(("x-",)))
        v = zeros_field("vec3", spec)
        q = np.zeros(spec.shape + (2,))
        q[..., 0] = 1.0
        q[..., 1] = -1.0
        beta = np.abs(q)
        quotients = {}
        for k2 in (0.5, 1e-9):
            m = iso_params(k2=k2, l_c=0.5)
            quotients[k2] = coercivity_probe(m, basis, spec, 1, seed=5,
                                             extra_samples=[(v, q, beta)])
        assert quotients[0.5] >= 0.2  # hardening controls the mode
        assert quotients[1e-9] <= 1e-8  # and its absence lets it collapse
