"""The GaussianState object and its closed-form scalar functionals.

A Gaussian state is completely determined by its mean vector mu (length 2n,
(x_1..x_n, p_1..p_n) ordering) and covariance matrix Sigma; the vacuum is
(0, I/2). All functionals here are closed forms on (mu, Sigma); the
truncated-Fock oracle in :mod:`gtl.fock` validates them numerically.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStateError, DomainError
from .symplectic import (
    ValidityClass,
    is_symplectic,
    modes_of,
    require_symmetric,
    symplectic_form,
    validate_covariance,
    williamson,
)

HAMILTONIAN_NU_MARGIN = 1e-6


@dataclass(frozen=True)
class GaussianState:
    """An n-mode Gaussian state (mu, Sigma)."""

    mu: np.ndarray
    sigma: np.ndarray
    _validity: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        sigma = require_symmetric(self.sigma)
        n = modes_of(sigma)
        if mu.shape != (2 * n,):
            raise DomainError(f"mean has shape {mu.shape}, expected ({2 * n},)")
        if not np.all(np.isfinite(mu)):
            raise DomainError("mean vector has non-finite entries")
        validity = validate_covariance(sigma)
        if not validity.is_valid:
            raise DomainError(
                f"covariance is not a valid Gaussian covariance (min nu = {validity.min_nu:.6g})"
            )
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_validity", validity)

    @property
    def n(self):
        return self.mu.shape[0] // 2

    @property
    def validity(self):
        return self._validity

    @property
    def is_pure(self):
        return self._validity.kind is ValidityClass.PURE_VALID


def vacuum_state(n):
    """The n-mode vacuum: zero mean, Sigma = I/2."""
    return GaussianState(np.zeros(2 * n), 0.5 * np.eye(2 * n))


def thermal_state(nu, n=1):
    """Product thermal state with equal symplectic eigenvalue nu on each mode."""
    if nu < 0.5:
        raise DomainError(f"thermal nu must be >= 1/2, got {nu}")
    return GaussianState(np.zeros(2 * n), nu * np.eye(2 * n))


def squeezed_state(a, b, theta=0.0, mu=(0.0, 0.0)):
    """Single-mode Gaussian state with principal variances (a, b) and squeezing angle theta.

    The covariance is R_theta diag(b, a) R_theta^T, i.e. theta is the angle of
    the b-variance (typically squeezed) axis; requires a*b >= 1/4.
    """
    if a * b < 0.25 - 1e-12:
        raise DomainError(f"variances {a}, {b} violate det >= 1/4")
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s], [s, c]])
    sigma = R @ np.diag([b, a]) @ R.T
    return GaussianState(np.asarray(mu, dtype=float), sigma)


def wigner_pdf(state, r):
    """Wigner function of a Gaussian state at phase-space point(s) r.

    Equals the multivariate normal density N(mu, Sigma) at r; ``r`` may be a
    single 2n vector or an (m, 2n) batch.

    Raises:
        DomainError: if Sigma is numerically singular (carries the condition
            number in the message).
    """
    r = np.atleast_2d(np.asarray(r, dtype=float))
    d = 2 * state.n
    if r.shape[-1] != d:
        raise DomainError(f"point dimension {r.shape[-1]} does not match 2n = {d}")
    sign, logdet = np.linalg.slogdet(state.sigma)
    cond = np.linalg.cond(state.sigma)
    if sign <= 0 or not np.isfinite(cond) or cond > 1e14:
        raise DomainError(f"covariance numerically singular (cond = {cond:.3e})")
    delta = r - state.mu
    solved = np.linalg.solve(state.sigma, delta.T).T
    quad = np.einsum("ij,ij->i", delta, solved)
    values = np.exp(-0.5 * quad - 0.5 * logdet - 0.5 * d * np.log(2 * np.pi))
    return values if values.size > 1 else float(values[0])


def fidelity_pure(rho, sigma):
    """Fidelity Tr(rho sigma) between Gaussian states, at least one of them pure.

    Uses the closed form det(S1+S2)^{-1/2} exp(-(dmu)^T (S1+S2)^{-1} dmu / 2)
    (squared-fidelity convention). Symmetric in its arguments.

    Raises:
        DomainError: if neither argument is pure (use the Fock oracle's
            Uhlmann fidelity for mixed-mixed pairs).
    """
    if not (rho.is_pure or sigma.is_pure):
        raise DomainError("fidelity_pure requires at least one pure argument")
    total = rho.sigma + sigma.sigma
    dmu = sigma.mu - rho.mu
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0:
        raise DomainError("Sigma_1 + Sigma_2 is not positive definite")
    quad = dmu @ np.linalg.solve(total, dmu)
    value = np.exp(-0.5 * logdet - 0.5 * quad)
    return float(min(max(value, 0.0), 1.0))


def vacuum_probability(rho):
    """Vacuum-outcome probability <0|rho|0> = fidelity with the vacuum."""
    return fidelity_pure(rho, vacuum_state(rho.n))


def gibbs_f(x):
    """f(x) = log((2x+1)/(2x-1)) / 2, the Gibbs spectral map on symplectic eigenvalues."""
    x = np.asarray(x, dtype=float)
    return 0.5 * np.log((2 * x + 1) / (2 * x - 1))


def gibbs_f_inverse(y):
    """Inverse of :func:`gibbs_f`: nu = coth(y)/2, with a guard for large y."""
    y = np.asarray(y, dtype=float)
    # np.tanh saturates to 1 well before overflow; beyond ~20 nats the series
    # value 1/2 + e^{-2y} is already below double precision of 1/2.
    return 0.5 / np.tanh(y)


def hamiltonian_matrix(sigma):
    """Hamiltonian matrix H of a non-degenerate Gaussian covariance.

    H is the quadratic Gibbs form, rho ~ exp(-R^T H R); with our Williamson
    convention Sigma = S D S^T it reads H = S^{-T} f(D) S^{-1} with
    f(x) = log((2x+1)/(2x-1))/2 applied to the diagonal.

    Raises:
        DegenerateStateError: if any symplectic eigenvalue is within 1e-6
            of 1/2 (pure or near-pure state, f diverges).
    """
    w = williamson(sigma)
    if np.any(w.nu <= 0.5 + HAMILTONIAN_NU_MARGIN):
        raise DegenerateStateError(
            f"state is degenerate (min nu = {w.nu[-1]:.8g}); Hamiltonian matrix undefined"
        )
    f_diag = np.concatenate([gibbs_f(w.nu), gibbs_f(w.nu)])
    S_inv = np.linalg.inv(w.S)
    H = S_inv.T @ np.diag(f_diag) @ S_inv
    return 0.5 * (H + H.T)


def sigma_from_hamiltonian(H):
    """Rebuild the covariance matrix from a Hamiltonian matrix (inverse of the above)."""
    w = williamson(require_symmetric(H))
    nu = gibbs_f_inverse(w.nu)
    d = np.concatenate([nu, nu])
    S_inv = np.linalg.inv(w.S)
    sigma = S_inv.T @ np.diag(d) @ S_inv
    return 0.5 * (sigma + sigma.T)


def entropy_g(x):
    """g(x) = (x+1) log(x+1) - x log(x), with g(0) = 0 by continuity."""
    x = np.asarray(x, dtype=float)
    x = np.clip(x, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (x + 1) * np.log1p(x) - x * np.log(x)
    return np.where(x > 0, out, 0.0)


def von_neumann_entropy(sigma):
    """Von Neumann entropy in nats: sum of g(nu_i - 1/2) over the symplectic spectrum."""
    w = williamson(require_symmetric(sigma))
    return float(np.sum(entropy_g(w.nu - 0.5)))


def _core_purification(nu):
    """Pure 4n-by-4n covariance purifying the thermal core diag(nu, nu).

    Mode layout (x_A, x_P, p_A, p_P): per pair of modes (j, n+j) the blocks
    are [[nu, c], [c, nu]] in x and [[nu, -c], [-c, nu]] in p, with
    c = sqrt(nu^2 - 1/4) (a two-mode-squeezed thermal purification).
    """
    n = len(nu)
    c = np.sqrt(np.clip(np.asarray(nu) ** 2 - 0.25, 0.0, None))
    X = np.block([[np.diag(nu), np.diag(c)], [np.diag(c), np.diag(nu)]])
    P = np.block([[np.diag(nu), -np.diag(c)], [-np.diag(c), np.diag(nu)]])
    out = np.zeros((4 * n, 4 * n))
    out[: 2 * n, : 2 * n] = X
    out[2 * n :, 2 * n :] = P
    return out


def momentum_flip(n):
    """diag(I_n, -I_n): the transposition map on covariance matrices."""
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def transpose_covariance(sigma):
    """Covariance of the transposed state: momentum signs flipped."""
    n = modes_of(sigma)
    Z = momentum_flip(n)
    return Z @ sigma @ Z


def purification_covariance(rho):
    """Gaussian purification of a zero-mean state on 2n modes.

    The first n modes carry the input marginal Sigma, the last n modes carry
    the transposed-state covariance; the output is PureValid with
    Tr Sigma_pure = 2 Tr Sigma and ||Sigma_pure||_op <= 4 ||Sigma||_op.
    Built from the Williamson form: a two-mode-squeezed purification of the
    thermal core, conjugated by S on the system half and by the transposed
    symplectic on the purifying half.

    Raises:
        DomainError: for nonzero mean (displace the A block after purifying
            the centered state instead).
    """
    if np.max(np.abs(rho.mu)) > 0:
        raise DomainError("purification_covariance requires a zero-mean state")
    n = rho.n
    w = williamson(rho.sigma)
    Z = momentum_flip(n)
    S_tr = Z @ w.S @ Z
    core = _core_purification(w.nu)
    # direct sum of S (A half) and S_tr (P half) in the interleaved layout
    big = np.zeros((4 * n, 4 * n))
    idx_a = np.concatenate([np.arange(n), np.arange(2 * n, 3 * n)])
    idx_p = np.concatenate([np.arange(n, 2 * n), np.arange(3 * n, 4 * n)])
    big[np.ix_(idx_a, idx_a)] = w.S
    big[np.ix_(idx_p, idx_p)] = S_tr
    sigma_pure = big @ core @ big.T
    sigma_pure = 0.5 * (sigma_pure + sigma_pure.T)
    return GaussianState(np.zeros(4 * n), sigma_pure)


def quadrature_indices(modes, n):
    """Flat (x then p) indices of the given mode subset."""
    modes = sorted(set(int(m) for m in modes))
    if not modes:
        raise DomainError("mode subset is empty")
    if modes[0] < 0 or modes[-1] >= n:
        raise DomainError(f"mode subset {modes} out of range for n = {n}")
    modes = np.asarray(modes)
    return np.concatenate([modes, modes + n]), modes


def reduce_state(state, modes):
    """Marginal Gaussian state (partial trace) on the selected modes."""
    idx, _ = quadrature_indices(modes, state.n)
    return GaussianState(state.mu[idx], state.sigma[np.ix_(idx, idx)])


def apply_symplectic(state, S):
    """Transform (mu, Sigma) -> (S mu, S Sigma S^T); S must be symplectic within 1e-8."""
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S):
        raise DomainError("matrix is not symplectic within tolerance 1e-8")
    sigma = S @ state.sigma @ S.T
    return GaussianState(S @ state.mu, 0.5 * (sigma + sigma.T))


def apply_displacement(state, xi):
    """Shift the mean by xi; the covariance is unchanged."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape != state.mu.shape:
        raise DomainError(f"displacement has shape {xi.shape}, expected {state.mu.shape}")
    return GaussianState(state.mu + xi, state.sigma)


def tensor(*states):
    """Tensor product of Gaussian states (direct sum of means/covariances)."""
    ns = [s.n for s in states]
    n = sum(ns)
    mu = np.zeros(2 * n)
    sigma = np.zeros((2 * n, 2 * n))
    offset = 0
    for s, nk in zip(states, ns):
        idx = np.concatenate([np.arange(offset, offset + nk), np.arange(n + offset, n + offset + nk)])
        mu[idx] = s.mu
        sigma[np.ix_(idx, idx)] = s.sigma
        offset += nk
    return GaussianState(mu, sigma)


def embed_symplectic(S_sub, modes, n):
    """Embed a symplectic on a mode subset as identity elsewhere (2n-by-2n)."""
    idx, _ = quadrature_indices(modes, n)
    if S_sub.shape[0] != len(idx):
        raise DomainError("sub-matrix dimension does not match the mode subset")
    out = np.eye(2 * n)
    out[np.ix_(idx, idx)] = S_sub
    return out
