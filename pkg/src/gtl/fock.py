"""Truncated-Fock brute-force oracle for single-mode Gaussian states.

Builds the density matrix numerically from the Gibbs form
rho ~ exp(-R^T H R) (displaced afterwards) and computes exact trace
distance, fidelity, entropy, and relative entropy. This is the independent
yardstick against which every closed form in the package is validated.
Multi-mode support is limited to tensor products of single-mode states.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import CutoffError, DomainError
from .states import GaussianState, gibbs_f
from .symplectic import williamson

MAX_CUTOFF = 512
_WORK_PAD = 16
# nu at or below 1/2 + NEAR_PURE_BAND is regularized up to 1/2 + NU_REGULARIZATION
# before the Gibbs construction (keeps a single construction path; the induced
# perturbation is folded into the oracle tolerances).
NEAR_PURE_BAND = 1e-4
NU_REGULARIZATION = 1e-6


def cutoff_for_energy(E, tol):
    """Smallest cutoff d with q^d <= tol (1 - q), q = (E - 1/2)/(E + 1/2).

    Keeps the tail mass of a thermal state with per-mode energy E below tol.
    """
    if E < 0.5:
        raise DomainError(f"per-mode energy must be >= 1/2, got {E}")
    if not 0 < tol < 1:
        raise DomainError(f"tolerance must be in (0, 1), got {tol}")
    q = (E - 0.5) / (E + 0.5)
    if q <= 0:
        return 1
    d = math.ceil(math.log(tol * (1 - q)) / math.log(q))
    return max(1, d)


def annihilation(d):
    """Truncated annihilation operator (d-by-d)."""
    return np.diag(np.sqrt(np.arange(1, d)), k=1)


def quadratures(d):
    """Truncated (x, p) with x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2)."""
    a = annihilation(d)
    x = (a + a.T) / np.sqrt(2)
    p = -1j * (a - a.T) / np.sqrt(2)
    return x, p


def number_operator(d):
    return np.diag(np.arange(d, dtype=float))


def displacement_operator(xi, d):
    """Truncated displacement exp(-i xi^T Omega R), shifting the mean by +xi."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape != (2,):
        raise DomainError("single-mode displacement needs a length-2 vector")
    x, p = quadratures(d)
    return expm(1j * (xi[1] * x - xi[0] * p))


@dataclass(frozen=True)
class FockDensity:
    """Truncated density matrix with its cutoff and pre-renormalization tail mass."""

    matrix: np.ndarray
    cutoff: int
    truncation_mass: float


@dataclass(frozen=True)
class _GibbsParts:
    """Working-cutoff pieces of the Gibbs construction for one state."""

    rho: np.ndarray  # normalized density at the working cutoff
    Q: np.ndarray  # quadratic generator R^T H R (truncated; exact band structure)
    log_z: float  # log trace of exp(-Q) at the working cutoff
    d_work: int
    near_pure: bool  # True if the symplectic spectrum was regularized


def _regularized_hamiltonian(sigma):
    w = williamson(sigma)
    near_pure = bool(np.any(w.nu <= 0.5 + NEAR_PURE_BAND))
    nu = np.where(w.nu <= 0.5 + NEAR_PURE_BAND, 0.5 + NU_REGULARIZATION, w.nu)
    f_diag = np.concatenate([gibbs_f(nu), gibbs_f(nu)])
    S_inv = np.linalg.inv(w.S)
    H = S_inv.T @ np.diag(f_diag) @ S_inv
    return 0.5 * (H + H.T), near_pure


def _gibbs_parts(state, d_work):
    H, near_pure = _regularized_hamiltonian(state.sigma)
    x, p = quadratures(d_work)
    Q = H[0, 0] * (x @ x) + H[1, 1] * (p @ p) + H[0, 1] * (x @ p + p @ x)
    Q = 0.5 * (Q + Q.conj().T)
    raw = expm(-Q)
    z = np.trace(raw).real
    rho = raw / z
    if np.any(np.abs(state.mu) > 0):
        D = displacement_operator(state.mu, d_work)
        rho = D @ rho @ D.conj().T
        Q = _displaced_generator(Q, H, state.mu, x, p)
    rho = 0.5 * (rho + rho.conj().T)
    return _GibbsParts(rho=rho, Q=Q, log_z=float(np.log(z)), d_work=d_work, near_pure=near_pure)


def _displaced_generator(Q, H, mu, x, p):
    """Generator of the displaced state: (R - mu)^T H (R - mu) (constant absorbed in log Z)."""
    mu = np.asarray(mu, dtype=float)
    linear = -2.0 * ((H[0, 0] * mu[0] + H[0, 1] * mu[1]) * x + (H[0, 1] * mu[0] + H[1, 1] * mu[1]) * p)
    const = float(mu @ H @ mu) * np.eye(Q.shape[0])
    out = Q + linear + const
    return 0.5 * (out + out.conj().T)


def _work_cutoff(d):
    return min(MAX_CUTOFF, d + _WORK_PAD)


def fock_density(state, d, tol=1e-6):
    """Density matrix of a single-mode Gaussian state at Fock cutoff d.

    Builds exp(-R^T H R) from truncated quadratures at a padded working
    cutoff, trace-normalizes, conjugates by the truncated displacement for
    the mean, and reports the mass outside the requested d-by-d block.

    Raises:
        CutoffError: if the truncation mass exceeds 10 * tol (the exception
            carries a suggested cutoff).
        DomainError: multi-mode state, d < 4, or d > 512.
    """
    if state.n != 1:
        raise DomainError(
            "fock_density handles single-mode states; tensor products go through tensor_density"
        )
    if d < 4:
        raise DomainError(f"cutoff must be at least 4, got {d}")
    if d > MAX_CUTOFF:
        raise DomainError(f"cutoff {d} exceeds the cap {MAX_CUTOFF}")
    parts = _gibbs_parts(state, _work_cutoff(d))
    block = parts.rho[:d, :d]
    trace = np.trace(block).real
    truncation_mass = float(max(0.0, 1.0 - trace))
    if truncation_mass > 10 * tol:
        suggested = min(MAX_CUTOFF, max(2 * d, d + 32))
        raise CutoffError(
            f"cutoff {d} too small: truncation mass {truncation_mass:.3e} > {10 * tol:.1e}",
            suggested_cutoff=suggested,
        )
    block = block / trace
    block = 0.5 * (block + block.conj().T)
    return FockDensity(matrix=block, cutoff=d, truncation_mass=truncation_mass)


def tensor_density(*densities):
    """Kronecker product of FockDensity factors (tensor-product states only)."""
    matrix = densities[0].matrix
    mass = densities[0].truncation_mass
    for f in densities[1:]:
        matrix = np.kron(matrix, f.matrix)
        mass = mass + f.truncation_mass
    return FockDensity(matrix=matrix, cutoff=matrix.shape[0], truncation_mass=mass)


def _eig_clip(matrix):
    vals = np.linalg.eigvalsh(matrix)
    if vals.min() < -1e-8:
        raise DomainError(f"density matrix has a significantly negative eigenvalue {vals.min():.3e}")
    return np.clip(vals, 0.0, None)


def matrix_entropy(matrix):
    """Von Neumann entropy -sum p log p of a density matrix (nats), 0 log 0 = 0."""
    vals = _eig_clip(matrix)
    vals = vals[vals > 0]
    vals = vals / vals.sum()
    return float(-np.sum(vals * np.log(vals)))


def fock_entropy(density):
    return matrix_entropy(density.matrix)


def fock_trace_distance(rho, sigma):
    """Exact trace distance: half the sum of |eigenvalues| of rho - sigma."""
    diff = rho.matrix - sigma.matrix
    vals = np.linalg.eigvalsh(diff)
    return float(0.5 * np.sum(np.abs(vals)))


def fock_fidelity(rho, sigma, either_pure):
    """Fidelity in the squared convention.

    Tr(rho sigma) when one state is pure (the paper's convention); otherwise
    the squared Uhlmann fidelity (flagged by the caller as oracle-only).
    """
    if either_pure:
        return float(np.trace(rho.matrix @ sigma.matrix).real)
    vals_r = np.linalg.eigvalsh(rho.matrix)
    _, vecs_r = np.linalg.eigh(rho.matrix)
    root_r = (vecs_r * np.sqrt(np.clip(vals_r, 0.0, None))) @ vecs_r.conj().T
    inner = root_r @ sigma.matrix @ root_r
    vals = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))) ** 2)


def oracle_metrics(rho_state, sigma_state, d, tol=1e-6):
    """Exact metrics between two single-mode Gaussian states at cutoff d.

    Returns a dict with trace_distance, fidelity (+ convention flag),
    relative_entropy S(rho||sigma) (+ finiteness flag), and entropy of rho.

    The relative entropy evaluates Tr(rho log sigma) through sigma's Gibbs
    generator, log sigma = -Q - log Z, which stays accurate far below the
    eigensolver's noise floor. If sigma is degenerate (pure up to the
    regularization band) and the states differ, the true value diverges:
    the regularized number is returned with the finite flag set to False.
    """
    if not isinstance(rho_state, GaussianState) or not isinstance(sigma_state, GaussianState):
        raise DomainError("oracle_metrics expects GaussianState inputs")
    if rho_state.n != 1 or sigma_state.n != 1:
        raise DomainError("oracle_metrics handles single-mode states")
    if d < 4 or d > MAX_CUTOFF:
        raise DomainError(f"cutoff must be in [4, {MAX_CUTOFF}], got {d}")

    d_work = _work_cutoff(d)
    parts_r = _gibbs_parts(rho_state, d_work)
    parts_s = _gibbs_parts(sigma_state, d_work)
    rho = FockDensity(parts_r.rho[:d, :d], d, 0.0)
    sig = FockDensity(parts_s.rho[:d, :d], d, 0.0)
    for block, state in ((rho, rho_state), (sig, sigma_state)):
        mass = float(max(0.0, 1.0 - np.trace(block.matrix).real))
        if mass > 10 * tol:
            raise CutoffError(
                f"cutoff {d} too small for the given states (mass {mass:.3e})",
                suggested_cutoff=min(MAX_CUTOFF, max(2 * d, d + 32)),
            )
    rho = FockDensity(rho.matrix / np.trace(rho.matrix).real, d, 0.0)
    sig = FockDensity(sig.matrix / np.trace(sig.matrix).real, d, 0.0)

    entropy_rho = matrix_entropy(parts_r.rho)
    cross = float(np.trace(parts_r.rho @ parts_s.Q).real) + parts_s.log_z
    relative = cross - entropy_rho
    distinct = fock_trace_distance(rho, sig) > 1e-7
    finite = not (parts_s.near_pure and distinct)

    either_pure = rho_state.is_pure or sigma_state.is_pure
    return {
        "trace_distance": fock_trace_distance(rho, sig),
        "fidelity": fock_fidelity(rho, sig, either_pure),
        "fidelity_convention": "tr-product-pure" if either_pure else "uhlmann-squared",
        "relative_entropy": float(relative),
        "relative_entropy_finite": finite,
        "entropy": entropy_rho,
    }
