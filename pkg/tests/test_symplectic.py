import numpy as np
import pytest

from gtl.errors import DecompositionError, DomainError
from gtl.symplectic import (
    CovarianceValidity,
    ValidityClass,
    a_route_eigenvalues,
    haar_unitary,
    is_symplectic,
    random_covariance,
    random_orthogonal_symplectic,
    random_symplectic,
    spectral_summary,
    symplectic_eigenvalues,
    symplectic_form,
    validate_covariance,
    williamson,
)


def iomega_eigenvalue_oracle(V):
    """Independent route: symplectic eigenvalues are |eig(i Omega V)|, each twice."""
    omega = symplectic_form(V.shape[0] // 2)
    vals = np.abs(np.linalg.eigvals(1j * omega @ V))
    vals.sort()
    return 0.5 * (vals[0::2] + vals[1::2])


class TestSymplecticForm:
    def test_block_layout_n1(self):
        assert np.array_equal(symplectic_form(1), [[0.0, 1.0], [-1.0, 0.0]])

    def test_squares_to_minus_identity(self):
        omega = symplectic_form(1)
        assert np.array_equal(omega @ omega, -np.eye(2))

    def test_antisymmetry_n3(self):
        omega = symplectic_form(3)
        assert np.array_equal(omega.T, -omega)

    def test_rejects_zero_modes(self):
        with pytest.raises(DomainError):
            symplectic_form(0)


class TestWilliamson:
    def test_diagonal_example(self):
        # oracle checks: S Omega S^T = Omega and S D S^T = V
        w = williamson(np.diag([2.0, 0.5]))
        assert np.allclose(w.nu, [1.0], atol=1e-12)
        omega = symplectic_form(1)
        assert np.max(np.abs(w.S @ omega @ w.S.T - omega)) < 1e-12
        assert np.max(np.abs(w.reconstruct() - np.diag([2.0, 0.5]))) < 1e-12
        assert np.allclose(w.S, np.diag([np.sqrt(2.0), 1 / np.sqrt(2.0)]), atol=1e-12)

    def test_vacuum(self):
        w = williamson(0.5 * np.eye(6))
        assert np.allclose(w.nu, 0.5)
        assert np.allclose(w.S, np.eye(6), atol=1e-12)

    def test_pure_squeezed(self):
        a = 9.0
        V = 0.5 * np.diag([a, 1 / a])
        w = williamson(V)
        assert abs(np.linalg.det(V) - 0.25) < 1e-12
        assert np.allclose(w.nu, 0.5, atol=1e-12)
        assert np.max(np.abs(w.reconstruct() - V)) < 1e-10
        assert validate_covariance(V).is_pure

    def test_rejects_non_pd(self):
        with pytest.raises(DecompositionError) as err:
            williamson(np.diag([1.0, -0.5]))
        assert err.value.min_eigenvalue < 0

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        V = random_covariance(3, 8.0, "mixed", rng)
        w1, w2 = williamson(V), williamson(V)
        assert np.array_equal(w1.S, w2.S)
        assert np.array_equal(w1.nu, w2.nu)

    @pytest.mark.parametrize("trial", range(12))
    def test_random_residuals_and_oracle(self, trial):
        rng = np.random.default_rng(100 + trial)
        n = int(rng.integers(1, 5))
        kind = ["pure", "mixed", "passive"][trial % 3]
        V = random_covariance(n, 8.0, kind, rng)
        w = williamson(V)
        assert w.symplectic_residual <= 1e-9
        assert w.reconstruction_residual <= 1e-8
        assert np.all(np.diff(w.nu) <= 1e-12)  # sorted descending
        assert np.allclose(np.sort(w.nu), np.sort(iomega_eigenvalue_oracle(V)), atol=1e-9)

    def test_spectrum_invariance_under_symplectic(self):
        rng = np.random.default_rng(11)
        V = random_covariance(2, 6.0, "mixed", rng)
        T = random_symplectic(2, rng, max_squeeze_log=0.7)
        nu1 = williamson(V).nu
        nu2 = williamson(T @ V @ T.T).nu
        assert np.max(np.abs(nu1 - nu2)) < 1e-8

    def test_single_mode_nu_is_sqrt_det(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            V = random_covariance(1, 8.0, "mixed", rng)
            assert abs(williamson(V).nu[0] - np.sqrt(np.linalg.det(V))) < 1e-10

    def test_a_route_matches(self):
        rng = np.random.default_rng(13)
        V = random_covariance(3, 6.0, "mixed", rng)
        assert np.allclose(
            np.sort(a_route_eigenvalues(V)), np.sort(symplectic_eigenvalues(V)), atol=1e-9
        )


class TestValidate:
    def test_vacuum_pure(self):
        v = validate_covariance(0.5 * np.eye(8))
        assert v.kind is ValidityClass.PURE_VALID

    def test_invalid_below_half(self):
        v = validate_covariance(np.diag([0.4, 0.4]))
        assert v.kind is ValidityClass.INVALID
        assert abs(v.min_nu - 0.4) < 1e-12

    def test_thermal_mixed(self):
        v = validate_covariance(np.diag([1.5, 1.5]))
        assert v.kind is ValidityClass.MIXED_VALID
        assert abs(v.min_nu - 1.5) < 1e-10

    def test_asymmetric_rejected(self):
        with pytest.raises(DomainError):
            validate_covariance(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_eigenvalue_pairing(self):
        # pairing sorted extremes: products bounded below by 1/4
        rng = np.random.default_rng(21)
        for kind in ("pure", "mixed", "passive"):
            V = random_covariance(3, 8.0, kind, rng)
            lam = np.sort(np.linalg.eigvalsh(V))
            products = lam * lam[::-1]
            assert np.all(products >= 0.25 - 1e-8)


class TestSpectralSummary:
    def test_condition_number(self):
        a = 4.0
        out = spectral_summary(0.5 * np.diag([a, 1 / a]))
        assert abs(out["condition_number"] - 16.0) < 1e-12

    def test_identity(self):
        out = spectral_summary(0.5 * np.eye(4))
        assert out["condition_number"] == 1.0

    def test_opnorm_capped_by_generator(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            V = random_covariance(2, 8.0, "mixed", rng)
            assert spectral_summary(V)["op_norm"] <= 8.0


class TestRandomOrthogonalSymplectic:
    def test_orthogonal_and_symplectic(self):
        rng = np.random.default_rng(41)
        for n in (1, 2, 4):
            K = random_orthogonal_symplectic(n, rng)
            omega = symplectic_form(n)
            assert np.max(np.abs(K @ K.T - np.eye(2 * n))) <= 1e-10
            assert np.max(np.abs(K @ omega @ K.T - omega)) <= 1e-10

    def test_single_mode_is_rotation(self):
        rng = np.random.default_rng(42)
        K = random_orthogonal_symplectic(1, rng)
        phi = np.arctan2(K[1, 0], K[0, 0])
        R = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
        assert np.allclose(K, R, atol=1e-12)

    def test_vacuum_invariance(self):
        rng = np.random.default_rng(43)
        K = random_orthogonal_symplectic(3, rng)
        assert validate_covariance(K @ (0.5 * np.eye(6)) @ K.T).is_pure

    def test_haar_first_entry_moment(self):
        # E[K_11^2] = E[(Re U_11)^2] = 1/(2n); cross-check the embedded sampler
        # against direct Haar-unitary draws
        rng = np.random.default_rng(44)
        n, m = 3, 10000
        embedded = np.array([random_orthogonal_symplectic(n, rng)[0, 0] ** 2 for _ in range(m)])
        direct = np.array([np.real(haar_unitary(n, rng)[0, 0]) ** 2 for _ in range(m)])
        target = 1 / (2 * n)
        for sample in (embedded, direct):
            se = sample.std(ddof=1) / np.sqrt(m)
            assert abs(sample.mean() - target) <= 3 * se


class TestRandomCovariance:
    def test_pure_determinant(self):
        rng = np.random.default_rng(51)
        V = random_covariance(3, 10.0, "pure", rng)
        det = np.linalg.det(V)
        assert abs(det - 4.0**-3) <= 1e-8 * 4.0**-3

    def test_passive_orthogonal_williamson(self):
        rng = np.random.default_rng(52)
        V = random_covariance(2, 8.0, "passive", rng)
        w = williamson(V)
        assert np.max(np.abs(w.S @ w.S.T - np.eye(4))) < 1e-8

    def test_mixed_class_and_norm(self):
        rng = np.random.default_rng(53)
        V = random_covariance(2, 8.0, "mixed", rng)
        val = validate_covariance(V)
        assert val.kind is ValidityClass.MIXED_VALID
        assert np.linalg.norm(V, 2) <= 8.0

    def test_infeasible_request(self):
        rng = np.random.default_rng(54)
        with pytest.raises(DomainError):
            random_covariance(1, 0.4, "mixed", rng)


class TestHelpers:
    def test_is_symplectic(self):
        rng = np.random.default_rng(61)
        assert is_symplectic(random_symplectic(2, rng))
        assert not is_symplectic(np.eye(4) * 2)

    def test_validity_dataclass(self):
        v = CovarianceValidity(ValidityClass.MIXED_VALID, 0.7)
        assert v.is_valid and not v.is_pure
