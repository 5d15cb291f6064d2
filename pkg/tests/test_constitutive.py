import numpy as np
import pytest

from gradplast.algebra import ElasticModuli, SlipBasis, SlipSystem, dev, sym, tr
from gradplast.constitutive import (
    IsotropicHardening,
    MaterialParams,
    PragerHardening,
    QuadraticHardening,
    State,
    bilinear_a,
    cauchy_stress,
    dislocation_density,
    dissipation_density,
    eshelby_stress,
    free_energy,
    load_pairing,
    resolved_stresses,
    validate_model,
    yield_function,
    zero_state,
)
from gradplast.errors import InvalidModel
from gradplast.grid import GridSpec, curl, l2_inner, l2_norm, zeros_field

E3 = np.eye(3)


def make_spec(n=4, faces=("x-",)):
    return GridSpec(n, n, n, h=1.0 / n, dirichlet_faces=frozenset(faces))


def single_basis():
    return SlipBasis([SlipSystem(E3[0], E3[1])])


def iso_params(mu=1.0, lam=0.8, l_c=0.4, sigma0=0.1, k2=0.3):
    return MaterialParams(ElasticModuli(mu, lam), L_c=l_c, sigma0=sigma0,
                          hardening=IsotropicHardening(k2))


def random_state(rng, spec, basis, m, scale=0.1):
    s = zero_state(spec, basis, m)
    s.u[...] = scale * rng.standard_normal(s.u.shape)
    s.gamma[...] = scale * rng.standard_normal(s.gamma.shape)
    if s.eta is not None:
        s.eta[...] = np.abs(s.gamma) + scale * rng.uniform(0, 1, s.eta.shape)
    return s


class TestHardeningLaws:
    def test_isotropic_needs_positive_modulus(self):
        with pytest.raises(InvalidModel):
            IsotropicHardening(0.0)

    def test_quadratic_needs_spd(self):
        with pytest.raises(InvalidModel):
            QuadraticHardening(np.array([[1.0, 2.0], [2.0, 1.0]]))  # indefinite
        with pytest.raises(InvalidModel):
            QuadraticHardening(np.array([[1.0, 0.5], [0.0, 1.0]]))  # asymmetric

    def test_prager_needs_positive_modulus(self):
        with pytest.raises(InvalidModel):
            PragerHardening(-1.0)

    def test_prager_rejects_coupled_systems(self):
        skew_basis = SlipBasis([SlipSystem(E3[0], E3[1]),
                                SlipSystem(E3[0], E3[2])])
        m = MaterialParams(ElasticModuli(1.0, 1.0), L_c=0.1, sigma0=0.1,
                           hardening=PragerHardening(0.5))
        with pytest.raises(InvalidModel):
            validate_model(m, skew_basis)

    def test_quadratic_size_must_match_basis(self):
        m = MaterialParams(ElasticModuli(1.0, 1.0), L_c=0.1, sigma0=0.1,
                           hardening=QuadraticHardening(np.eye(2)))
        with pytest.raises(InvalidModel):
            validate_model(m, single_basis())


class TestCauchyStress:
    def test_zero_state(self):
        spec, basis, m = make_spec(), single_basis(), iso_params()
        s = zero_state(spec, basis, m)
        assert np.max(np.abs(cauchy_stress(s, m, basis, spec))) == 0.0

    def test_homogeneous_shear_closed_form(self):
        # u = (g*y, 0, 0) on minus-face Dirichlet grid: strains exact
        spec = make_spec(4, faces=("y-",))
        basis, m = single_basis(), iso_params()
        g_amp, gam = 0.05, 0.02
        s = zero_state(spec, basis, m)
        y = (np.arange(spec.ny) + 0.5) * spec.h
        s.u[..., 0] = g_amp * y[None, :, None]
        s.gamma[..., 0] = gam
        sigma = cauchy_stress(s, m, basis, spec)
        interior = sigma[:, :-1]
        assert np.allclose(interior[..., 0, 1], m.elastic.mu * (g_amp - gam),
                           atol=1e-14)
        assert np.allclose(interior[..., 1, 0], m.elastic.mu * (g_amp - gam),
                           atol=1e-14)

    def test_trace_law_for_elastic_states(self):
        spec, basis, m = make_spec(), single_basis(), iso_params()
        rng = np.random.default_rng(0)
        s = zero_state(spec, basis, m)
        s.u[...] = rng.standard_normal(s.u.shape)
        sigma = cauchy_stress(s, m, basis, spec)
        from gradplast.grid import grad
        strain = sym(grad(s.u, spec))
        ref = (2 * m.elastic.mu + 3 * m.elastic.lam) * tr(strain)
        assert np.allclose(tr(sigma), ref, atol=1e-12)

    def test_symmetric(self):
        spec, basis, m = make_spec(), single_basis(), iso_params()
        s = random_state(np.random.default_rng(1), spec, basis, m)
        sigma = cauchy_stress(s, m, basis, spec)
        assert np.max(np.abs(sigma - np.swapaxes(sigma, -1, -2))) <= 1e-12


class TestDislocationDensity:
    def test_uniform_slip_curl_free(self):
        spec, basis = make_spec(4, faces=("x-",)), single_basis()
        gamma = np.full(spec.shape + (1,), 0.37)
        assert np.max(np.abs(dislocation_density(gamma, basis, spec))) == 0.0

    def test_linear_slip_single_entry(self):
        # gamma = x on system (e1, e2): the only nonzero entry of the
        # row-wise curl is (1,3), equal to the slip gradient
        spec, basis = make_spec(4, faces=("x-",)), single_basis()
        x = (np.arange(spec.nx) + 0.5) * spec.h
        gamma = np.zeros(spec.shape + (1,))
        gamma[..., 0] = x[:, None, None]
        a = dislocation_density(gamma, basis, spec)
        interior = a[:-1]
        assert np.allclose(interior[..., 0, 2], 1.0, atol=1e-13)
        mask = np.ones((3, 3), dtype=bool)
        mask[0, 2] = False
        assert np.max(np.abs(interior[..., mask])) <= 1e-13

    def test_row_wise_divergence_free(self):
        from gradplast.grid import divergence
        spec, basis = make_spec(5, faces=("x-", "z+")), single_basis()
        rng = np.random.default_rng(2)
        gamma = rng.standard_normal(spec.shape + (1,))
        assert np.max(np.abs(divergence(dislocation_density(gamma, basis, spec),
                                        spec))) <= 1e-12


class TestEshelbyStress:
    def test_reduces_to_cauchy_without_length_scale(self):
        spec, basis = make_spec(), single_basis()
        m = iso_params(l_c=0.0)
        s = random_state(np.random.default_rng(3), spec, basis, m)
        assert np.array_equal(eshelby_stress(s, m, basis, spec),
                              cauchy_stress(s, m, basis, spec))

    def test_uniform_slip_no_backstress(self):
        spec, basis, m = make_spec(4, faces=("x-",)), single_basis(), iso_params()
        s = zero_state(spec, basis, m)
        s.gamma[...] = 0.21
        assert np.allclose(eshelby_stress(s, m, basis, spec),
                           cauchy_stress(s, m, basis, spec), atol=1e-14)

    def test_adjoint_identity_against_defect_energy(self):
        spec, basis, m = make_spec(), single_basis(), iso_params()
        rng = np.random.default_rng(4)
        s = random_state(rng, spec, basis, m)
        q = rng.standard_normal(spec.shape + (1,))
        lhs = l2_inner(eshelby_stress(s, m, basis, spec)
                       - cauchy_stress(s, m, basis, spec),
                       basis.apply(q), spec)
        mu_lc2 = m.elastic.mu * m.L_c ** 2
        rhs = -mu_lc2 * l2_inner(curl(basis.apply(s.gamma), spec),
                                 curl(basis.apply(q), spec), spec)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


class TestResolvedStresses:
    def test_zero_state(self):
        spec, basis, m = make_spec(), single_basis(), iso_params()
        s = zero_state(spec, basis, m)
        tau, g = resolved_stresses(s, m, basis, spec)
        assert np.max(np.abs(tau)) == 0.0
        assert np.max(np.abs(g)) == 0.0

    def test_homogeneous_shear_values(self):
        spec = make_spec(4, faces=("y-",))
        basis, m = single_basis(), iso_params(l_c=0.0)
        g_amp, gam, eta0 = 0.05, 0.02, 0.01
        s = zero_state(spec, basis, m)
        y = (np.arange(spec.ny) + 0.5) * spec.h
        s.u[..., 0] = g_amp * y[None, :, None]
        s.gamma[..., 0] = gam
        s.eta[..., 0] = eta0
        tau, g = resolved_stresses(s, m, basis, spec)
        assert np.allclose(tau[:, :-1], m.elastic.mu * (g_amp - gam), atol=1e-14)
        assert np.allclose(g, -m.elastic.mu * m.hardening.k2 * eta0, atol=1e-15)

    def test_deviatoric_invariance(self):
        spec, basis, m = make_spec(), single_basis(), iso_params(l_c=0.0)
        rng = np.random.default_rng(5)
        s = random_state(rng, spec, basis, m)
        sigma = cauchy_stress(s, m, basis, spec)
        gap = basis.project(dev(sigma)) - basis.project(sigma)
        assert np.max(np.abs(gap)) <= 1e-13 * max(1.0, float(np.max(np.abs(sigma))))

    def test_kinematic_backstresses(self):
        spec = make_spec()
        e = np.eye(3)
        basis = SlipBasis([SlipSystem(e[0], e[1]), SlipSystem(e[1], e[2])])
        h = np.array([[2.0, 0.3], [0.3, 1.0]])
        m = MaterialParams(ElasticModuli(1.0, 0.8), L_c=0.0, sigma0=0.1,
                           hardening=QuadraticHardening(h))
        s = zero_state(spec, basis, m)
        rng = np.random.default_rng(6)
        s.gamma[...] = rng.standard_normal(s.gamma.shape)
        tau, g = resolved_stresses(s, m, basis, spec)
        assert g is None
        sigma_part = basis.project(cauchy_stress(s, m, basis, spec))
        ref = sigma_part - np.einsum("...b,ab->...a", s.gamma, h)
        assert np.allclose(tau, ref, atol=1e-13)

        m2 = MaterialParams(ElasticModuli(1.0, 0.8), L_c=0.0, sigma0=0.1,
                            hardening=PragerHardening(0.7))
        basis_orth = SlipBasis([SlipSystem(e[0], e[1]), SlipSystem(e[1], e[2]),
                                SlipSystem(e[2], e[0])])
        s2 = zero_state(spec, basis_orth, m2)
        s2.gamma[...] = rng.standard_normal(s2.gamma.shape)
        tau2, _ = resolved_stresses(s2, m2, basis_orth, spec)
        ref2 = (basis_orth.project(cauchy_stress(s2, m2, basis_orth, spec))
                - 0.7 * basis_orth.project(sym(basis_orth.apply(s2.gamma))))
        assert np.allclose(tau2, ref2, atol=1e-13)


class TestYieldAndDissipation:
    def test_threshold_cases(self):
        m = iso_params(sigma0=0.25)
        assert yield_function(0.25, 0.0, m) == pytest.approx(0.0)
        assert yield_function(0.0, 0.0, m) == pytest.approx(-0.25)

    def test_hardening_grows_the_surface(self):
        m = iso_params(sigma0=0.25, k2=0.4)
        eta = 0.3
        g = -m.elastic.mu * m.hardening.k2 * eta
        radius = m.sigma0 + m.elastic.mu * m.hardening.k2 * eta
        assert yield_function(radius, g, m) == pytest.approx(0.0, abs=1e-15)

    def test_kinematic_variant_ignores_g(self):
        m = MaterialParams(ElasticModuli(1.0, 1.0), L_c=0.0, sigma0=0.2,
                           hardening=QuadraticHardening(np.eye(1)))
        assert yield_function(0.3, None, m) == pytest.approx(0.1)

    def test_admissible_set_convex(self):
        m = iso_params(sigma0=0.2)
        rng = np.random.default_rng(7)
        found = 0
        while found < 50:
            tau = rng.uniform(-1, 1, size=2)
            g = rng.uniform(-1, 0, size=2)
            if np.all(yield_function(tau, g, m) <= 0.0):
                found += 1
                mid_t, mid_g = tau.mean(), g.mean()
                assert yield_function(mid_t, mid_g, m) <= 1e-14
                assert mid_g <= 0.0

    def test_dissipation_density_cases(self):
        m = iso_params(sigma0=0.3)
        assert dissipation_density(0.0, 0.0, m) == 0.0
        assert dissipation_density(0.5, 0.2, m) == np.inf
        q, b = 0.4, 0.7
        for c in (0.5, 2.0, 7.5):
            assert dissipation_density(c * q, c * b, m) == pytest.approx(
                c * dissipation_density(q, b, m))


class TestEnergies:
    def test_zero_state_zero_energy(self):
        spec, basis, m = make_spec(), single_basis(), iso_params()
        br = free_energy(zero_state(spec, basis, m), m, basis, spec)
        assert br.elastic == br.defect == br.hardening == br.total == 0.0

    def test_uniform_slip_zero_defect(self):
        spec, basis, m = make_spec(4, faces=("x-",)), single_basis(), iso_params()
        s = zero_state(spec, basis, m)
        s.gamma[...] = 0.4
        assert free_energy(s, m, basis, spec).defect == 0.0

    def test_prager_orthogonal_reduces_to_quarter_norm(self):
        e = np.eye(3)
        basis = SlipBasis([SlipSystem(e[0], e[1]), SlipSystem(e[1], e[2]),
                           SlipSystem(e[2], e[0])])
        m = MaterialParams(ElasticModuli(1.3, 0.9), L_c=0.0, sigma0=0.1,
                           hardening=PragerHardening(0.8))
        spec = make_spec()
        s = zero_state(spec, basis, m)
        rng = np.random.default_rng(8)
        s.gamma[...] = rng.standard_normal(s.gamma.shape)
        hard = free_energy(s, m, basis, spec).hardening
        ref = 0.25 * 1.3 * 0.8 * l2_inner(s.gamma, s.gamma, spec)
        assert hard == pytest.approx(ref, rel=1e-13)

    def test_bilinear_symmetric_psd_and_twice_energy(self):
        spec, basis, m = make_spec(), single_basis(), iso_params()
        rng = np.random.default_rng(9)
        s = random_state(rng, spec, basis, m)
        z = random_state(rng, spec, basis, m)
        w_t = (s.u, s.gamma, s.eta)
        z_t = (z.u, z.gamma, z.eta)
        a_wz = bilinear_a(w_t, z_t, m, basis, spec)
        a_zw = bilinear_a(z_t, w_t, m, basis, spec)
        assert abs(a_wz - a_zw) <= 1e-12 * max(1.0, abs(a_wz))
        a_ww = bilinear_a(w_t, w_t, m, basis, spec)
        assert a_ww >= 0.0
        assert a_ww == pytest.approx(2.0 * free_energy(s, m, basis, spec).total,
                                     rel=1e-12)

    @pytest.mark.parametrize("family", ["isotropic", "quadratic", "prager"])
    def test_gradient_consistency_finite_differences(self, family):
        e = np.eye(3)
        spec = make_spec()
        if family == "prager":
            basis = SlipBasis([SlipSystem(e[0], e[1]), SlipSystem(e[1], e[2])])
            law = PragerHardening(0.6)
        elif family == "quadratic":
            basis = SlipBasis([SlipSystem(e[0], e[1]), SlipSystem(e[1], e[2])])
            law = QuadraticHardening(np.array([[1.5, 0.2], [0.2, 0.9]]))
        else:
            basis = single_basis()
            law = IsotropicHardening(0.3)
        m = MaterialParams(ElasticModuli(1.0, 0.8), L_c=0.3, sigma0=0.1,
                           hardening=law)
        rng = np.random.default_rng(10)
        s = random_state(rng, spec, basis, m)
        d = random_state(rng, spec, basis, m)
        eps = 1e-5

        def at(c):
            shifted = State(s.u + c * d.u, s.gamma + c * d.gamma,
                            None if s.eta is None else s.eta + c * d.eta)
            return free_energy(shifted, m, basis, spec).total

        fd = (at(eps) - at(-eps)) / (2 * eps)
        analytic = bilinear_a((s.u, s.gamma, s.eta), (d.u, d.gamma, d.eta),
                              m, basis, spec)
        assert abs(fd - analytic) <= 1e-5 * max(1.0, abs(analytic))

    def test_load_pairing(self):
        spec = GridSpec(8, 8, 8, h=0.125, dirichlet_faces=frozenset(("x-",)))
        f = zeros_field("vec3", spec)
        v = zeros_field("vec3", spec)
        assert load_pairing(f, v, spec) == 0.0
        f[..., 0] = 1.0
        v[..., 0] = 1.0
        assert load_pairing(f, v, spec) == pytest.approx(1.0, abs=1e-14)
        rng = np.random.default_rng(11)
        a = rng.standard_normal(f.shape)
        b = rng.standard_normal(f.shape)
        lhs = load_pairing(f, 2.0 * a + b, spec)
        rhs = 2.0 * load_pairing(f, a, spec) + load_pairing(f, b, spec)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
