import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from gtl.errors import DegenerateStateError, DomainError
from gtl.states import (
    GaussianState,
    apply_displacement,
    apply_symplectic,
    entropy_g,
    fidelity_pure,
    gibbs_f,
    gibbs_f_inverse,
    hamiltonian_matrix,
    purification_covariance,
    reduce_state,
    sigma_from_hamiltonian,
    squeezed_state,
    tensor,
    thermal_state,
    vacuum_state,
    vacuum_probability,
    von_neumann_entropy,
    wigner_pdf,
)
from gtl.symplectic import random_covariance, random_symplectic, validate_covariance


class TestWigner:
    def test_vacuum_origin(self):
        assert abs(wigner_pdf(vacuum_state(1), [0.0, 0.0]) - 1 / math.pi) < 1e-14

    def test_mode_value(self):
        rng = np.random.default_rng(0)
        sigma = random_covariance(2, 6.0, "mixed", rng)
        mu = rng.normal(size=4)
        state = GaussianState(mu, sigma)
        expected = (2 * math.pi) ** -2 / math.sqrt(np.linalg.det(sigma))
        assert abs(wigner_pdf(state, mu) - expected) < 1e-12 * expected

    def test_matches_scipy_density(self):
        rng = np.random.default_rng(1)
        sigma = random_covariance(1, 4.0, "mixed", rng)
        mu = rng.normal(size=2)
        state = GaussianState(mu, sigma)
        pts = rng.normal(size=(50, 2))
        oracle = multivariate_normal(mean=mu, cov=sigma).pdf(pts)
        assert np.allclose(wigner_pdf(state, pts), oracle, rtol=1e-10)

    def test_monte_carlo_self_normalization(self):
        rng = np.random.default_rng(2)
        sigma = random_covariance(1, 4.0, "mixed", rng)
        state = GaussianState([0.3, -0.1], sigma)
        # importance sample from a wider reference normal
        ref_cov = 2.0 * sigma
        ref = multivariate_normal(mean=state.mu, cov=ref_cov)
        m = 100_000
        pts = ref.rvs(size=m, random_state=np.random.default_rng(3))
        weights = wigner_pdf(state, pts) / ref.pdf(pts)
        se = weights.std(ddof=1) / math.sqrt(m)
        assert abs(weights.mean() - 1.0) <= 3 * se


class TestFidelity:
    def test_identical_vacuum(self):
        assert fidelity_pure(vacuum_state(2), vacuum_state(2)) == 1.0

    def test_displaced_vacuum(self):
        v = vacuum_state(1)
        d = apply_displacement(v, [1.0, 0.0])
        assert abs(fidelity_pure(v, d) - math.exp(-0.5)) < 1e-14

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        pure = GaussianState(rng.normal(size=2), random_covariance(1, 6.0, "pure", rng))
        mixed = GaussianState(rng.normal(size=2), random_covariance(1, 6.0, "mixed", rng))
        assert abs(fidelity_pure(pure, mixed) - fidelity_pure(mixed, pure)) < 1e-14

    def test_both_mixed_rejected(self):
        th = thermal_state(1.2)
        with pytest.raises(DomainError):
            fidelity_pure(th, th)

    def test_unit_iff_identical(self):
        rng = np.random.default_rng(5)
        a = GaussianState(np.zeros(2), random_covariance(1, 5.0, "pure", rng))
        b = GaussianState(np.zeros(2), random_covariance(1, 5.0, "pure", rng))
        assert fidelity_pure(a, a) > 1 - 1e-12
        assert fidelity_pure(a, b) < 1 - 1e-6


class TestVacuumProbability:
    def test_isotropic_thermal_formula(self):
        # <0|rho|0> = (1 + eps/2n)^{-n} for Sigma = (1 + eps/n) I / 2
        for n, eps in ((1, 0.5), (3, 0.7), (16, 0.5)):
            state = GaussianState(np.zeros(2 * n), 0.5 * (1 + eps / n) * np.eye(2 * n))
            assert abs(vacuum_probability(state) - (1 + eps / (2 * n)) ** -n) < 1e-12

    def test_vacuum_is_one(self):
        assert vacuum_probability(vacuum_state(3)) == 1.0

    def test_single_mode_thermal(self):
        assert abs(vacuum_probability(thermal_state(1.5)) - 0.5) < 1e-14

    def test_maximized_by_vacuum(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            state = GaussianState(rng.normal(scale=0.3, size=2),
                                  random_covariance(1, 5.0, "mixed", rng))
            assert vacuum_probability(state) < 1.0


class TestHamiltonian:
    def test_thermal_value(self):
        H = hamiltonian_matrix(thermal_state(1.5).sigma)
        assert np.allclose(H, 0.5 * math.log(2.0) * np.eye(2), atol=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateStateError):
            hamiltonian_matrix(0.5 * np.eye(2))

    def test_conjugation_covariance(self):
        rng = np.random.default_rng(7)
        sigma = random_covariance(2, 6.0, "mixed", rng)
        T = random_symplectic(2, rng, max_squeeze_log=0.5)
        lhs = hamiltonian_matrix(T @ sigma @ T.T)
        T_inv = np.linalg.inv(T)
        rhs = T_inv.T @ hamiltonian_matrix(sigma) @ T_inv
        assert np.max(np.abs(lhs - rhs)) < 1e-8 * max(1.0, np.max(np.abs(rhs)))

    def test_round_trip(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            sigma = random_covariance(2, 8.0, "mixed", rng)
            back = sigma_from_hamiltonian(hamiltonian_matrix(sigma))
            assert np.max(np.abs(back - sigma)) < 1e-8 * np.linalg.norm(sigma, 2)

    def test_f_inverse(self):
        x = np.array([0.6, 1.0, 4.0, 50.0])
        assert np.allclose(gibbs_f_inverse(gibbs_f(x)), x, rtol=1e-12)
        # series guard region: huge f maps to nu ~ 1/2 without overflow
        assert abs(gibbs_f_inverse(25.0) - 0.5) < 1e-12


class TestEntropy:
    def test_pure_zero(self):
        rng = np.random.default_rng(9)
        assert von_neumann_entropy(random_covariance(2, 8.0, "pure", rng)) < 1e-6

    def test_thermal_value(self):
        expected = 1.5 * math.log(1.5) + 0.5 * math.log(2.0)  # g(1/2)
        assert abs(von_neumann_entropy(np.eye(2)) - expected) < 1e-12

    def test_additivity(self):
        rng = np.random.default_rng(10)
        s1 = GaussianState(np.zeros(2), random_covariance(1, 5.0, "mixed", rng))
        s2 = GaussianState(np.zeros(4), random_covariance(2, 5.0, "mixed", rng))
        joint = tensor(s1, s2)
        assert abs(
            von_neumann_entropy(joint.sigma)
            - von_neumann_entropy(s1.sigma)
            - von_neumann_entropy(s2.sigma)
        ) < 1e-9

    def test_g_at_zero(self):
        assert entropy_g(0.0) == 0.0


class TestPurification:
    def test_thermal_blocks(self):
        nu = 1.5
        pure = purification_covariance(thermal_state(nu))
        c = math.sqrt(nu**2 - 0.25)
        assert abs(c - math.sqrt(2.0)) < 1e-12
        expected = np.array(
            [[nu, c, 0, 0], [c, nu, 0, 0], [0, 0, nu, -c], [0, 0, -c, nu]]
        )
        assert np.allclose(pure.sigma, expected, atol=1e-12)
        assert pure.is_pure

    def test_pure_input_uncorrelated(self):
        rng = np.random.default_rng(11)
        sigma = random_covariance(1, 6.0, "pure", rng)
        pure = purification_covariance(GaussianState(np.zeros(2), sigma))
        assert np.max(np.abs(reduce_state(pure, [0]).sigma - sigma)) < 1e-9
        cross = pure.sigma[np.ix_([0, 2], [1, 3])]
        assert np.max(np.abs(cross)) < 1e-6

    def test_invariants_on_random_mixed(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            sigma = random_covariance(n, 8.0, "mixed", rng)
            state = GaussianState(np.zeros(2 * n), sigma)
            pure = purification_covariance(state)
            assert pure.n == 2 * n
            assert pure.is_pure
            assert abs(np.trace(pure.sigma) - 2 * np.trace(sigma)) <= 1e-10 * np.trace(sigma)
            assert np.linalg.norm(pure.sigma, 2) <= 4 * np.linalg.norm(sigma, 2) + 1e-9
            a_marg = reduce_state(pure, range(n)).sigma
            assert np.max(np.abs(a_marg - sigma)) < 1e-9
            p_marg = reduce_state(pure, range(n, 2 * n)).sigma
            Z = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
            assert np.max(np.abs(p_marg - Z @ sigma @ Z)) < 1e-9

    def test_rejects_nonzero_mean(self):
        with pytest.raises(DomainError):
            purification_covariance(GaussianState([1.0, 0.0], 1.5 * np.eye(2)))


class TestReduceAndTransforms:
    def test_reduce_product_state(self):
        s1 = thermal_state(1.2)
        s2 = squeezed_state(a=2.0, b=0.5, theta=0.3)
        joint = tensor(s1, s2)
        assert np.allclose(reduce_state(joint, [0]).sigma, s1.sigma)
        assert np.allclose(reduce_state(joint, [1]).sigma, s2.sigma)

    def test_reduce_idempotence(self):
        rng = np.random.default_rng(13)
        state = GaussianState(rng.normal(size=6), random_covariance(3, 6.0, "mixed", rng))
        once = reduce_state(state, [0, 2])
        twice = reduce_state(once, [0])
        direct = reduce_state(state, [0])
        assert np.allclose(twice.sigma, direct.sigma)
        assert np.allclose(twice.mu, direct.mu)

    def test_reduce_bad_modes(self):
        state = vacuum_state(2)
        with pytest.raises(DomainError):
            reduce_state(state, [])
        with pytest.raises(DomainError):
            reduce_state(state, [5])

    def test_identity_transform(self):
        state = thermal_state(1.3)
        out = apply_symplectic(state, np.eye(2))
        assert np.allclose(out.sigma, state.sigma)

    def test_vacuum_invariant_under_rotation(self):
        from gtl.symplectic import random_orthogonal_symplectic

        rng = np.random.default_rng(14)
        K = random_orthogonal_symplectic(2, rng)
        out = apply_symplectic(vacuum_state(2), K)
        assert np.allclose(out.sigma, 0.5 * np.eye(4), atol=1e-12)

    def test_unsqueeze_to_vacuum(self):
        a = 5.0
        state = GaussianState(np.zeros(2), 0.5 * np.diag([a, 1 / a]))
        S = np.diag([1 / math.sqrt(a), math.sqrt(a)])
        out = apply_symplectic(state, S)
        assert np.allclose(out.sigma, 0.5 * np.eye(2), atol=1e-12)

    def test_non_symplectic_rejected(self):
        with pytest.raises(DomainError):
            apply_symplectic(vacuum_state(1), 2 * np.eye(2))

    def test_validity_preserved(self):
        rng = np.random.default_rng(15)
        state = GaussianState(np.zeros(4), random_covariance(2, 6.0, "pure", rng))
        T = random_symplectic(2, rng)
        assert apply_symplectic(state, T).is_pure

    def test_invalid_covariance_rejected(self):
        with pytest.raises(DomainError):
            GaussianState([0.0, 0.0], 0.4 * np.eye(2))
