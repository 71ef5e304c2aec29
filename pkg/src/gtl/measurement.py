"""Exact classical sampling of Gaussian measurements on Gaussian states.

The outcome law of a general-dyne measurement with seed covariance V on a
Gaussian state (mu, Sigma) is N(mu, Sigma + V); homodyne along angle phi is
modeled as the finite-squeezing general-dyne with seed
R_phi diag(1/c, c) R_phi^T followed by projection onto e_phi (never as an
idealized delta measurement), so outcomes follow N(mu_phi, Sigma_phi + 1/c).

A StateOracle wraps a hidden ground-truth state and keeps the consumed-copy
ledger that all sample-complexity statements are about. Views created by
``transformed`` / ``replaced`` share the ledger: each derived copy consumes
one base copy (they simulate pre-measurement unitaries and copy-preserving
channels).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky

from .errors import DomainError
from .states import GaussianState, apply_symplectic
from .symplectic import validate_covariance

_SINGULAR_FLOOR = 1e-12


@dataclass(frozen=True)
class GeneralDyneSeed:
    """Seed covariance V of a general-dyne measurement (V + i Omega/2 >= 0)."""

    V: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        if not validate_covariance(V).is_valid:
            raise DomainError("seed covariance is not a valid Gaussian covariance")
        object.__setattr__(self, "V", V)

    @property
    def n(self):
        return self.V.shape[0] // 2


def heterodyne_seed(n):
    """The heterodyne seed V = I/2 on n modes."""
    return GeneralDyneSeed(0.5 * np.eye(2 * n))


@dataclass(frozen=True)
class HomodyneSetting:
    """Finite-squeezing homodyne along phase-space angle phi.

    The seed is R_phi diag(1/c, c) R_phi^T; c is the squeezing parameter
    (the protocols of this package set c = E).
    """

    phi: float
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"squeezing parameter must be positive, got {self.c}")

    @property
    def direction(self):
        return np.array([np.cos(self.phi), np.sin(self.phi)])

    def seed_matrix(self):
        c_, s_ = np.cos(self.phi), np.sin(self.phi)
        R = np.array([[c_, -s_], [s_, c_]])
        return R @ np.diag([1.0 / self.c, self.c]) @ R.T


def homodyne_moments(state, phi):
    """Projected moments (mu_phi, Sigma_phi) of a single-mode state.

    mu_phi = e_phi . mu and Sigma_phi = e_phi^T Sigma e_phi
    = b + (a - b) sin^2(theta - phi) in principal-axis form.
    """
    if state.n != 1:
        raise DomainError("homodyne moments are defined for single-mode states")
    e = np.array([np.cos(phi), np.sin(phi)])
    return float(e @ state.mu), float(e @ state.sigma @ e)


class _Ledger:
    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


def _draw_gaussian(mean, cov, m, rng):
    try:
        L = cholesky(cov, lower=True)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(cov)
        vals = np.clip(vals, _SINGULAR_FLOOR, None)
        L = vecs * np.sqrt(vals)
    z = rng.standard_normal((mean.shape[0], m))
    return (L @ z).T + mean


class StateOracle:
    """Copy-dispensing handle around a hidden Gaussian state.

    Every sampling call increments the consumed-copies ledger by the number
    of copies measured. Single-owner mutable resource: do not share one
    oracle across workers; build per-trial oracles from (seed, trial index).
    """

    def __init__(self, truth, rng, _ledger=None, _recorder=None):
        if not isinstance(truth, GaussianState):
            raise DomainError("oracle truth must be a GaussianState")
        self._truth = truth
        self.rng = rng
        self._ledger = _ledger if _ledger is not None else _Ledger()
        self._recorder = _recorder

    def record_samples(self):
        """Attach (and return) a list capturing (copy_index, outcome) rows.

        Views created afterwards share the recorder, so a learner's entire
        sampling history can be dumped (the --dump-samples CSV).
        """
        if self._recorder is None:
            self._recorder = []
        return self._recorder

    def _log(self, outcomes):
        if self._recorder is not None:
            start = self._ledger.count - len(outcomes)
            for i, row in enumerate(np.atleast_2d(outcomes)):
                self._recorder.append((start + i, tuple(float(x) for x in row)))

    @property
    def n(self):
        return self._truth.n

    @property
    def consumed(self):
        return self._ledger.count

    def sample_general_dyne(self, seed, m):
        """m i.i.d. outcomes of the general-dyne measurement with the given seed."""
        if isinstance(seed, np.ndarray):
            seed = GeneralDyneSeed(seed)
        if seed.n != self.n:
            raise DomainError(f"seed is on {seed.n} modes, state on {self.n}")
        if m < 0:
            raise DomainError("copy count must be non-negative")
        if m == 0:
            return np.empty((0, 2 * self.n))
        self._ledger.count += int(m)
        out = _draw_gaussian(self._truth.mu, self._truth.sigma + seed.V, int(m), self.rng)
        self._log(out)
        return out

    def sample_homodyne(self, setting, m):
        """m scalar homodyne outcomes ~ N(mu_phi, Sigma_phi + 1/c) (single mode only)."""
        if self.n != 1:
            raise DomainError("homodyne sampling is single-mode only in this artifact")
        vectors = self.sample_general_dyne(GeneralDyneSeed(setting.seed_matrix()), m)
        return vectors @ setting.direction

    def sample_wigner(self, m):
        """m samples from the Wigner distribution N(mu, Sigma); consumes m copies.

        This is the classical resource appearing in positive-Wigner POVM
        simulation: one state copy per Wigner sample.
        """
        if m < 0:
            raise DomainError("copy count must be non-negative")
        if m == 0:
            return np.empty((0, 2 * self.n))
        self._ledger.count += int(m)
        out = _draw_gaussian(self._truth.mu, self._truth.sigma, int(m), self.rng)
        self._log(out)
        return out

    def transformed(self, S, xi=None):
        """Oracle view measuring U_S rho U_S^dag (+ displacement); shares the ledger."""
        truth = apply_symplectic(self._truth, S)
        if xi is not None:
            truth = GaussianState(truth.mu + np.asarray(xi, dtype=float), truth.sigma)
        return StateOracle(truth, self.rng, _ledger=self._ledger, _recorder=self._recorder)

    def replaced(self, new_truth):
        """Oracle view with a different hidden truth but the same ledger.

        Simulates a copy-preserving channel applied to the source: each copy
        drawn from the view consumes one copy of the base state.
        """
        return StateOracle(new_truth, self.rng, _ledger=self._ledger, _recorder=self._recorder)


def sample_general_dyne(oracle, seed, m):
    return oracle.sample_general_dyne(seed, m)


def sample_homodyne(oracle, setting, m):
    return oracle.sample_homodyne(setting, m)
