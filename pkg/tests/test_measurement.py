import numpy as np
import pytest
from scipy.stats import kstest, norm

from gtl.errors import DomainError
from gtl.measurement import (
    GeneralDyneSeed,
    HomodyneSetting,
    StateOracle,
    heterodyne_seed,
    homodyne_moments,
    sample_general_dyne,
    sample_homodyne,
)
from gtl.states import GaussianState, squeezed_state, thermal_state, vacuum_state
from gtl.symplectic import random_covariance, random_orthogonal_symplectic


class TestSeeds:
    def test_heterodyne_seed(self):
        assert np.allclose(heterodyne_seed(2).V, 0.5 * np.eye(4))

    def test_invalid_seed_rejected(self):
        with pytest.raises(DomainError):
            GeneralDyneSeed(0.3 * np.eye(2))

    def test_homodyne_seed_matrix(self):
        setting = HomodyneSetting(phi=0.0, c=50.0)
        assert np.allclose(setting.seed_matrix(), np.diag([0.02, 50.0]))

    def test_homodyne_seed_valid(self):
        setting = HomodyneSetting(phi=1.1, c=200.0)
        GeneralDyneSeed(setting.seed_matrix())  # nu = 1 >= 1/2

    def test_bad_squeezing(self):
        with pytest.raises(DomainError):
            HomodyneSetting(phi=0.0, c=0.0)


class TestGeneralDyne:
    def test_outcome_law(self):
        rng = np.random.default_rng(0)
        sigma = random_covariance(1, 4.0, "mixed", rng)
        mu = np.array([0.7, -0.4])
        oracle = StateOracle(GaussianState(mu, sigma), rng)
        seed = heterodyne_seed(1)
        m = 200_000
        out = sample_general_dyne(oracle, seed, m)
        assert np.max(np.abs(out.mean(axis=0) - mu)) < 3 * np.sqrt(np.max(sigma + 0.5) / m) * 3
        emp = np.cov(out.T)
        assert np.max(np.abs(emp - (sigma + 0.5 * np.eye(2)))) < 0.05

    def test_zero_copies(self):
        rng = np.random.default_rng(1)
        oracle = StateOracle(vacuum_state(2), rng)
        out = oracle.sample_general_dyne(heterodyne_seed(2), 0)
        assert out.shape == (0, 4)
        assert oracle.consumed == 0

    def test_ledger_exact(self):
        rng = np.random.default_rng(2)
        oracle = StateOracle(vacuum_state(1), rng)
        counts = [17, 3, 0, 129]
        for m in counts:
            oracle.sample_general_dyne(heterodyne_seed(1), m)
        oracle.sample_homodyne(HomodyneSetting(0.2, 30.0), 11)
        oracle.sample_wigner(5)
        assert oracle.consumed == sum(counts) + 11 + 5

    def test_dim_mismatch(self):
        rng = np.random.default_rng(3)
        oracle = StateOracle(vacuum_state(2), rng)
        with pytest.raises(DomainError):
            oracle.sample_general_dyne(heterodyne_seed(1), 5)

    def test_log_likelihood_consistency(self):
        # log-likelihood per sample of the analytic law is within 3 sigma of
        # its expectation (= -entropy of the outcome normal)
        rng = np.random.default_rng(4)
        sigma = random_covariance(1, 5.0, "mixed", rng)
        state = GaussianState([0.2, 0.1], sigma)
        oracle = StateOracle(state, rng)
        seed = heterodyne_seed(1)
        m = 50_000
        out = oracle.sample_general_dyne(seed, m)
        cov = sigma + seed.V
        inv = np.linalg.inv(cov)
        delta = out - state.mu
        quads = np.einsum("ij,jk,ik->i", delta, inv, delta)
        loglik = -0.5 * quads - 0.5 * np.linalg.slogdet(2 * np.pi * cov)[1]
        expected = -(0.5 * 2 + 0.5 * np.linalg.slogdet(2 * np.pi * cov)[1])
        se = loglik.std(ddof=1) / np.sqrt(m)
        assert abs(loglik.mean() - expected) <= 3 * se


class TestHomodyne:
    def test_vacuum_variance(self):
        rng = np.random.default_rng(5)
        oracle = StateOracle(vacuum_state(1), rng)
        z = oracle.sample_homodyne(HomodyneSetting(phi=0.9, c=100.0), 150_000)
        assert abs(z.var(ddof=1) - 0.51) < 0.01

    def test_mean_projection(self):
        rng = np.random.default_rng(6)
        oracle = StateOracle(GaussianState([1.0, 0.0], 0.5 * np.eye(2)), rng)
        z = oracle.sample_homodyne(HomodyneSetting(phi=0.0, c=50.0), 100_000)
        assert abs(z.mean() - 1.0) < 0.02

    def test_squeezed_projection_variance(self):
        rng = np.random.default_rng(7)
        state = squeezed_state(a=2.0, b=0.5, theta=0.0)
        oracle = StateOracle(state, rng)
        c = 80.0
        z = sample_homodyne(oracle, HomodyneSetting(phi=np.pi / 2, c=c), 150_000)
        assert abs(z.var(ddof=1) - (2.0 + 1 / c)) < 0.04

    def test_multimode_unsupported(self):
        rng = np.random.default_rng(8)
        oracle = StateOracle(vacuum_state(2), rng)
        with pytest.raises(DomainError):
            oracle.sample_homodyne(HomodyneSetting(0.0, 10.0), 5)

    def test_distribution_ks(self):
        # seed-pinned KS test of homodyne samples against N(mu_phi, Sigma_phi + 1/c)
        rng = np.random.default_rng(9)
        state = squeezed_state(a=3.0, b=0.25 / 3, theta=0.8, mu=(0.4, -0.2))
        oracle = StateOracle(state, rng)
        phi, c = 1.3, 60.0
        z = oracle.sample_homodyne(HomodyneSetting(phi, c), 10_000)
        mu_phi, s_phi = homodyne_moments(state, phi)
        result = kstest(z, norm(loc=mu_phi, scale=np.sqrt(s_phi + 1 / c)).cdf)
        assert result.pvalue >= 0.01


class TestMoments:
    def test_squeezed_axis(self):
        state = squeezed_state(a=2.0, b=0.5, theta=0.7)
        _, s_min = homodyne_moments(state, 0.7)
        _, s_max = homodyne_moments(state, 0.7 + np.pi / 2)
        assert abs(s_min - 0.5) < 1e-12
        assert abs(s_max - 2.0) < 1e-12

    def test_variance_period_pi(self):
        state = squeezed_state(a=2.5, b=0.3, theta=0.4, mu=(0.5, -0.1))
        for phi in (0.0, 0.3, 1.2):
            _, s1 = homodyne_moments(state, phi)
            m1, _ = homodyne_moments(state, phi)
            m2, s2 = homodyne_moments(state, phi + np.pi)
            assert abs(s1 - s2) < 1e-12
            assert abs(m1 + m2) < 1e-12  # mean flips sign

    def test_formula(self):
        a, b, theta = 2.2, 0.4, 0.9
        state = squeezed_state(a=a, b=b, theta=theta)
        for phi in (0.1, 0.9, 2.0):
            _, s_phi = homodyne_moments(state, phi)
            assert abs(s_phi - (b + (a - b) * np.sin(theta - phi) ** 2)) < 1e-12


class TestOracleViews:
    def test_transformed_shares_ledger(self):
        rng = np.random.default_rng(10)
        base = StateOracle(thermal_state(1.5), rng)
        K = random_orthogonal_symplectic(1, rng)
        view = base.transformed(K)
        view.sample_general_dyne(heterodyne_seed(1), 40)
        base.sample_general_dyne(heterodyne_seed(1), 2)
        assert base.consumed == 42
        assert view.consumed == 42

    def test_replaced_truth(self):
        rng = np.random.default_rng(11)
        base = StateOracle(vacuum_state(1), rng)
        view = base.replaced(thermal_state(2.0))
        out = view.sample_general_dyne(heterodyne_seed(1), 60_000)
        assert abs(np.var(out[:, 0], ddof=1) - 2.5) < 0.08
        assert base.consumed == 60_000
