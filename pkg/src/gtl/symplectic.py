"""Symplectic linear algebra over R^{2n} in the (x_1..x_n, p_1..p_n) ordering.

Conventions used throughout the package:

* the symplectic form is ``Omega = [[0, I], [-I, 0]]``;
* a covariance matrix is physical iff all symplectic eigenvalues are >= 1/2,
  and pure iff they all equal 1/2 (equivalently det = 4^-n);
* Williamson decompositions are written ``V = S D S^T`` with
  ``D = diag(nu_1..nu_n, nu_1..nu_n)`` and ``S Omega S^T = Omega``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import schur

from .errors import DecompositionError, DomainError

# Tolerances (see module design notes): symmetry is absolute, the validity
# margin is relative to ||V||_op, and purity gets its own window on nu.
SYMMETRY_ATOL = 1e-10
VALIDITY_RTOL = 1e-8
PURITY_NU_WINDOW = 1e-6
NU_CLUSTER_TOL = 1e-7


def symplectic_form(n):
    """Return the 2n-by-2n symplectic form [[0, I], [-I, 0]].

    Args:
        n: mode count, must be >= 1.
    """
    if n < 1:
        raise DomainError(f"mode count must be >= 1, got {n}")
    omega = np.zeros((2 * n, 2 * n))
    omega[:n, n:] = np.eye(n)
    omega[n:, :n] = -np.eye(n)
    return omega


def modes_of(matrix):
    """Mode count of a 2n-by-2n matrix; raises DomainError on bad shape."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] % 2 != 0 or matrix.shape[0] == 0:
        raise DomainError(f"matrix dimension {matrix.shape[0]} is not even and positive")
    return matrix.shape[0] // 2


def require_symmetric(matrix, atol=SYMMETRY_ATOL):
    """Return the symmetrized matrix; raise if the asymmetry exceeds ``atol``."""
    matrix = np.asarray(matrix, dtype=float)
    asym = np.max(np.abs(matrix - matrix.T)) if matrix.size else 0.0
    if asym > atol:
        raise DomainError(f"matrix is not symmetric: max|V - V^T| = {asym:.3e} > {atol:.1e}")
    return 0.5 * (matrix + matrix.T)


def is_symplectic(S, atol=1e-8):
    """Check ``S Omega S^T = Omega`` entrywise within ``atol``."""
    S = np.asarray(S, dtype=float)
    n = modes_of(S)
    omega = symplectic_form(n)
    return np.max(np.abs(S @ omega @ S.T - omega)) <= atol


class ValidityClass(Enum):
    INVALID = "invalid"
    MIXED_VALID = "mixed"
    PURE_VALID = "pure"


@dataclass(frozen=True)
class CovarianceValidity:
    """Validity class of a candidate covariance matrix plus its min symplectic eigenvalue."""

    kind: ValidityClass
    min_nu: float

    @property
    def is_valid(self):
        return self.kind is not ValidityClass.INVALID

    @property
    def is_pure(self):
        return self.kind is ValidityClass.PURE_VALID


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """Williamson decomposition ``V = S D S^T``.

    Attributes:
        S: 2n-by-2n symplectic matrix.
        nu: length-n symplectic eigenvalues, sorted descending.
        symplectic_residual: max|S Omega S^T - Omega|.
        reconstruction_residual: ||S D S^T - V||_F / ||V||_F.
    """

    S: np.ndarray
    nu: np.ndarray
    symplectic_residual: float
    reconstruction_residual: float

    @property
    def n(self):
        return len(self.nu)

    @property
    def D(self):
        return np.diag(np.concatenate([self.nu, self.nu]))

    def reconstruct(self):
        return self.S @ self.D @ self.S.T


def _symmetric_sqrt(V):
    w, U = np.linalg.eigh(V)
    if w[0] <= 0:
        raise DecompositionError(
            f"matrix is not positive definite (min eigenvalue {w[0]:.3e})",
            min_eigenvalue=float(w[0]),
        )
    return (U * np.sqrt(w)) @ U.T


def a_route_eigenvalues(V):
    """Symplectic eigenvalues via the spectrum of A(V) = -Omega V Omega V.

    The (ordinary) eigenvalues of A(V) are the squared symplectic
    eigenvalues, each appearing twice; A(V) is similar to the symmetric
    matrix V^{1/2} (Omega^T V Omega) V^{1/2}. The absolute accuracy of this
    route degrades like ||V||_op^2, so it serves as a cross-check while
    :func:`symplectic_eigenvalues` is the authoritative computation.
    """
    V = require_symmetric(V)
    n = modes_of(V)
    omega = symplectic_form(n)
    root = _symmetric_sqrt(V)
    sym = root @ (omega.T @ V @ omega) @ root
    sym = 0.5 * (sym + sym.T)
    squares = np.linalg.eigvalsh(sym)  # ascending, each nu^2 twice
    squares = np.sqrt(np.clip(squares, 0.0, None))
    paired = 0.5 * (squares[0::2] + squares[1::2])
    return paired[::-1].copy()


def symplectic_eigenvalues(V):
    """Symplectic eigenvalues of a symmetric PD matrix, sorted descending.

    Computed as the singular values of the antisymmetric matrix
    V^{1/2} Omega V^{1/2}, each appearing twice. That matrix has norm
    nu_max regardless of how squeezed V is, which keeps small symplectic
    eigenvalues accurate even for badly conditioned covariances.
    """
    V = require_symmetric(V)
    n = modes_of(V)
    omega = symplectic_form(n)
    root = _symmetric_sqrt(V)
    W = root @ omega @ root
    singular = np.linalg.svd(0.5 * (W - W.T), compute_uv=False)  # descending, nu twice
    return 0.5 * (singular[0::2] + singular[1::2])


def williamson(V):
    """Williamson decomposition of a symmetric positive-definite matrix.

    Returns ``WilliamsonDecomposition`` with ``S D S^T = V``, ``S`` symplectic,
    and ``nu`` sorted descending. The output is deterministic for a given
    input: eigenplanes are ordered by descending nu and each plane's x-column
    has its first significant entry made positive.

    Raises:
        DecompositionError: if ``V`` is not positive definite (carries the
            offending minimum eigenvalue).
    """
    V = require_symmetric(V)
    n = modes_of(V)
    omega = symplectic_form(n)
    root = _symmetric_sqrt(V)

    nu_from_a = a_route_eigenvalues(V)

    # Antisymmetric W = V^{1/2} Omega V^{1/2} has real Schur form with 2x2
    # blocks [[0, nu], [-nu, 0]] on the diagonal.
    W = root @ omega @ root
    W = 0.5 * (W - W.T)
    T, Q = schur(W, output="real")

    nu_planes = np.empty(n)
    cols = Q.copy()
    for j in range(n):
        t = T[2 * j, 2 * j + 1]
        if t < 0:
            cols[:, [2 * j, 2 * j + 1]] = cols[:, [2 * j + 1, 2 * j]]
            t = -t
        nu_planes[j] = t

    order = np.argsort(-nu_planes, kind="stable")
    nu = nu_planes[order]

    # interleaved (x_j, p_j) plane columns -> xxpp ordering
    Qp = np.empty_like(cols)
    for new_j, old_j in enumerate(order):
        Qp[:, new_j] = cols[:, 2 * old_j]
        Qp[:, n + new_j] = cols[:, 2 * old_j + 1]

    # sign convention: first significant entry of each plane's x-column positive
    for j in range(n):
        x_col = Qp[:, j]
        nonzero = np.nonzero(np.abs(x_col) > 1e-12)[0]
        if nonzero.size and x_col[nonzero[0]] < 0:
            Qp[:, j] = -Qp[:, j]
            Qp[:, n + j] = -Qp[:, n + j]

    d_inv_root = np.concatenate([nu, nu]) ** -0.5
    S = root @ Qp * d_inv_root[np.newaxis, :]

    # canonicalize the in-plane rotation freedom where possible: the symplectic
    # polar factor (S S^T)^{1/2} is the unique symmetric-positive choice and is
    # valid whenever it still reconstructs V (always for n = 1 and for inputs
    # with fully degenerate clusters, e.g. the vacuum)
    D_diag = np.concatenate([nu, nu])
    polar = _symmetric_sqrt(S @ S.T)
    if np.max(np.abs((polar * D_diag[np.newaxis, :]) @ polar.T - V)) <= 1e-10 * max(
        1.0, float(np.linalg.norm(V, 2))
    ):
        S = polar

    # the A(V) route loses absolute accuracy like ||V||_op^2; compare at that scale
    cross_tol = 1e-8 * max(1.0, float(np.linalg.norm(V, 2)))
    if np.max(np.abs(np.sort(nu) - np.sort(nu_from_a))) > cross_tol:
        raise DecompositionError(
            "symplectic spectra from the A(V) route and the Schur route disagree"
        )

    D = np.diag(np.concatenate([nu, nu]))
    sympl_res = float(np.max(np.abs(S @ omega @ S.T - omega)))
    recon_res = float(np.linalg.norm(S @ D @ S.T - V) / np.linalg.norm(V))
    return WilliamsonDecomposition(
        S=S, nu=nu, symplectic_residual=sympl_res, reconstruction_residual=recon_res
    )


def validate_covariance(V, tol=VALIDITY_RTOL):
    """Classify a symmetric matrix as Invalid / MixedValid / PureValid.

    ``tol`` is relative to ||V||_op and sets the validity margin on the
    minimum symplectic eigenvalue; purity uses the fixed +-1e-6 window on nu.

    Raises:
        DomainError: if the input is asymmetric beyond the symmetry tolerance.
    """
    V = require_symmetric(V)
    try:
        nu = symplectic_eigenvalues(V)
    except DecompositionError:
        return CovarianceValidity(ValidityClass.INVALID, min_nu=float("nan"))
    min_nu = float(nu[-1])
    margin = tol * float(np.linalg.norm(V, 2))
    if np.all(np.abs(nu - 0.5) <= PURITY_NU_WINDOW):
        return CovarianceValidity(ValidityClass.PURE_VALID, min_nu=min_nu)
    if min_nu >= 0.5 - margin:
        return CovarianceValidity(ValidityClass.MIXED_VALID, min_nu=min_nu)
    return CovarianceValidity(ValidityClass.INVALID, min_nu=min_nu)


def spectral_summary(V):
    """Ordinary spectral summary: eigenvalues (ascending), op norm, condition number."""
    V = require_symmetric(V)
    eigenvalues = np.linalg.eigvalsh(V)
    if eigenvalues[0] <= 0:
        raise DecompositionError(
            f"matrix is not positive definite (min eigenvalue {eigenvalues[0]:.3e})",
            min_eigenvalue=float(eigenvalues[0]),
        )
    return {
        "eigenvalues": eigenvalues,
        "op_norm": float(eigenvalues[-1]),
        "condition_number": float(eigenvalues[-1] / eigenvalues[0]),
    }


def haar_unitary(n, rng):
    """Haar-random n-by-n unitary via QR of a complex Ginibre matrix.

    The R factor's diagonal phases are absorbed into Q (made real positive),
    which makes the distribution exactly Haar.
    """
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def unitary_to_symplectic(U):
    """Real embedding [[X, -Y], [Y, X]] of a unitary U = X + iY (xxpp ordering)."""
    X, Y = np.real(U), np.imag(U)
    return np.block([[X, -Y], [Y, X]])


def random_orthogonal_symplectic(n, rng):
    """Draw K uniformly from the orthogonal symplectic group, i.e. Haar on U(n) embedded."""
    if n < 1:
        raise DomainError(f"mode count must be >= 1, got {n}")
    return unitary_to_symplectic(haar_unitary(n, rng))


def random_symplectic(n, rng, max_squeeze_log=1.0):
    """Random symplectic S = K1 Z K2 with Z = diag(e^r, e^-r), r ~ U[0, max_squeeze_log]."""
    K1 = random_orthogonal_symplectic(n, rng)
    K2 = random_orthogonal_symplectic(n, rng)
    r = rng.uniform(0.0, max_squeeze_log, size=n)
    Z = np.diag(np.concatenate([np.exp(r), np.exp(-r)]))
    return K1 @ Z @ K2


def random_covariance(n, E, kind, rng):
    """Random covariance matrix fixture of the requested validity class.

    Args:
        n: mode count.
        E: operator-norm cap (must exceed 1).
        kind: 'pure', 'mixed', or 'passive'.
        rng: numpy Generator.

    Returns:
        2n-by-2n covariance with op norm <= E; 'pure' has det = 4^-n,
        'mixed' has all nu in a nondegenerate band, 'passive' has an
        orthogonal Williamson S.
    """
    if E <= 1.0:
        raise DomainError(f"op-norm cap must exceed 1 for a usable fixture, got {E}")
    cap = 0.98 * E
    if kind == "pure":
        K = random_orthogonal_symplectic(n, rng)
        r = rng.uniform(0.0, 0.5 * np.log(2 * cap), size=n)
        z2 = np.concatenate([np.exp(2 * r), np.exp(-2 * r)])
        return 0.5 * (K * z2[np.newaxis, :]) @ K.T
    if kind == "mixed":
        nu_max = 1.0 + min(E, 4.0) / 4.0
        nu = rng.uniform(0.55, nu_max, size=n)
        r_max = 0.5 * np.log(cap / nu_max)
        S = random_symplectic(n, rng, max_squeeze_log=max(r_max, 0.0))
        D = np.diag(np.concatenate([nu, nu]))
        return S @ D @ S.T
    if kind == "passive":
        nu = rng.uniform(0.55, cap, size=n)
        nu = np.maximum(nu, 0.55)
        K = random_orthogonal_symplectic(n, rng)
        d = np.concatenate([nu, nu])
        return (K * d[np.newaxis, :]) @ K.T
    raise DomainError(f"unknown covariance kind {kind!r}")
