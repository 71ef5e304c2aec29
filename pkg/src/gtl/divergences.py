"""Distances and divergences between states and distributions.

Classical side: Gaussian KL / chi^2 closed forms, the Mahalanobis-style
deviation Delta with its TV bracket [Delta/200, Delta/sqrt(2)] (valid under
the TV <= 1/600 proviso), and an unbiased Monte-Carlo TV estimator.

Quantum side: exact pure-state trace distance, a trace-distance bracket for
mixed Gaussian pairs (perturbation upper bound vs. measurement lower
bounds), the multiplicative constants relating Wigner-TV to trace distance,
the symmetrized relative entropy trace formula, and its Holevo-quantity
corollary for i.i.d. ensembles.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular

from .errors import DomainError
from .states import GaussianState, fidelity_pure, hamiltonian_matrix, vacuum_probability
from .symplectic import require_symmetric

TV_BRACKET_LOWER_FACTOR = 1.0 / 200.0
TV_BRACKET_UPPER_FACTOR = 1.0 / math.sqrt(2.0)
TV_BRACKET_PROVISO = 1.0 / 600.0

WIGNER_LOWER_CONSTANT = math.sqrt(2.0) / 400.0
WIGNER_LOWER_PROVISO = math.sqrt(2.0) / 240000.0
WIGNER_PURE_UPPER_CONSTANT = 150.0
WIGNER_UPPER_PROVISO = 1.0 / 600.0


@dataclass(frozen=True)
class GaussianDistribution:
    """A classical multivariate normal (no quantum validity constraint)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = require_symmetric(self.cov, atol=1e-8)
        if cov.shape[0] != mean.shape[0]:
            raise DomainError(f"mean dim {mean.shape[0]} != cov dim {cov.shape[0]}")
        if np.linalg.eigvalsh(cov)[0] <= 0:
            raise DomainError("covariance must be positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.shape[0]


def wigner_distribution(state):
    """The Wigner function of a Gaussian state as a classical Gaussian N(mu, Sigma)."""
    return GaussianDistribution(state.mu, state.sigma)


@dataclass(frozen=True)
class DistanceBracket:
    """Two-sided bound on a distance, with method tags per side.

    ``proviso_met`` is None when the bracket's validity proviso has not been
    checked (callers resolve it, e.g. with a Monte-Carlo pre-check).
    """

    lower: float
    upper: float
    lower_method: str
    upper_method: str
    proviso_met: object = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise DomainError(f"bracket lower {self.lower} exceeds upper {self.upper}")


def _check_dims(p, q):
    if p.dim != q.dim:
        raise DomainError(f"dimension mismatch: {p.dim} vs {q.dim}")


def gaussian_kl(p, q):
    """KL(p || q) in nats between multivariate normals.

    Closed form (Tr(S2^-1 S1 - I) - log det(S2^-1 S1) + dmu^T S2^-1 dmu) / 2.
    """
    _check_dims(p, q)
    try:
        factor = cho_factor(q.cov)
    except np.linalg.LinAlgError as exc:
        raise DomainError("base covariance is singular") from exc
    solved = cho_solve(factor, p.cov)
    dmu = p.mean - q.mean
    quad = float(dmu @ cho_solve(factor, dmu))
    trace_term = float(np.trace(solved)) - p.dim
    _, logdet_p = np.linalg.slogdet(p.cov)
    _, logdet_q = np.linalg.slogdet(q.cov)
    return 0.5 * (trace_term - (logdet_p - logdet_q) + quad)


def gaussian_chi2(p, q):
    """chi^2(p || q) between multivariate normals.

    det(S2) / sqrt(det(S1) det(2 S2 - S1)) * exp(dmu^T (2 S2 - S1)^-1 dmu) - 1;
    requires 2 S2 - S1 > 0 (raises DomainError otherwise, signalling the
    closed form's applicability condition).
    """
    _check_dims(p, q)
    gap = 2 * q.cov - p.cov
    if np.linalg.eigvalsh(gap)[0] <= 0:
        raise DomainError("chi^2 closed form requires 2*Sigma_q - Sigma_p to be positive definite")
    dmu = p.mean - q.mean
    quad = float(dmu @ np.linalg.solve(gap, dmu))
    _, logdet_q = np.linalg.slogdet(q.cov)
    _, logdet_p = np.linalg.slogdet(p.cov)
    _, logdet_gap = np.linalg.slogdet(gap)
    return float(np.exp(logdet_q - 0.5 * (logdet_p + logdet_gap) + quad) - 1.0)


def _whitened_deviation(p, q):
    """max(||Q^-1/2 P Q^-1/2 - I||_F, ||Q^-1/2 (mu_q - mu_p)||_2) with q as base."""
    vals, vecs = np.linalg.eigh(q.cov)
    if vals[0] <= 0:
        raise DomainError("base covariance is singular")
    inv_root = (vecs / np.sqrt(vals)) @ vecs.T
    middle = inv_root @ p.cov @ inv_root - np.eye(p.dim)
    cov_dev = float(np.linalg.norm(middle, "fro"))
    mean_dev = float(np.linalg.norm(inv_root @ (q.mean - p.mean)))
    return max(cov_dev, mean_dev)


def mahalanobis_delta(p, q, symmetrized=False):
    """The whitened deviation Delta bracketing Gaussian TV.

    With q as the base: Delta = max(||S2^-1/2 S1 S2^-1/2 - I||_F,
    ||S2^-1/2 (mu2 - mu1)||_2). ``symmetrized=True`` returns the max over
    both orderings.
    """
    _check_dims(p, q)
    delta = _whitened_deviation(p, q)
    if symmetrized:
        delta = max(delta, _whitened_deviation(q, p))
    return delta


def tv_bracket(p, q):
    """TV bracket [Delta/200, Delta/sqrt(2)], valid only under TV <= 1/600.

    The proviso is surfaced, never silently assumed: ``proviso_met`` is None
    and is resolved by the caller (e.g. via :func:`tv_monte_carlo`).
    """
    delta = mahalanobis_delta(p, q)
    return DistanceBracket(
        lower=min(1.0, delta * TV_BRACKET_LOWER_FACTOR),
        upper=min(1.0, delta * TV_BRACKET_UPPER_FACTOR),
        lower_method="whitened-deviation/200",
        upper_method="whitened-deviation/sqrt2",
        proviso_met=None,
    )


class _LogPdf:
    """Cached Cholesky machinery for a Gaussian log density."""

    def __init__(self, dist):
        self.mean = dist.mean
        self.chol = cholesky(dist.cov, lower=True)
        self.log_norm = -0.5 * dist.dim * math.log(2 * math.pi) - float(
            np.sum(np.log(np.diag(self.chol)))
        )

    def __call__(self, x):
        delta = x - self.mean
        z = solve_triangular(self.chol, delta.T, lower=True)
        return self.log_norm - 0.5 * np.sum(z * z, axis=0)

    def sample(self, m, rng):
        z = rng.standard_normal((self.mean.shape[0], m))
        return (self.chol @ z).T + self.mean


def tv_monte_carlo(p, q, m, rng, chunk=65536):
    """Unbiased Monte-Carlo estimate of TV(p, q) with its standard error.

    Importance-samples from the equal mixture (p + q)/2; the integrand
    |p - q| / (p + q) equals |tanh((log p - log q)/2)|, which keeps the
    estimator in [0, 1] and numerically stable in the far tails.

    Returns:
        dict with 'estimate' and 'std_error'. Aggregation over chunks is a
        plain sum, so the result is independent of chunking order.
    """
    _check_dims(p, q)
    if m < 1000:
        raise DomainError(f"tv_monte_carlo needs at least 1e3 samples, got {m}")
    log_p = _LogPdf(p)
    log_q = _LogPdf(q)
    total = 0.0
    total_sq = 0.0
    remaining = m
    while remaining > 0:
        k = min(chunk, remaining)
        pick_p = rng.random(k) < 0.5
        n_p = int(np.count_nonzero(pick_p))
        x = np.empty((k, p.dim))
        if n_p:
            x[pick_p] = log_p.sample(n_p, rng)
        if k - n_p:
            x[~pick_p] = log_q.sample(k - n_p, rng)
        f = np.abs(np.tanh(0.5 * (log_p(x) - log_q(x))))
        total += float(np.sum(f))
        total_sq += float(np.sum(f * f))
        remaining -= k
    mean = total / m
    var = max(total_sq / m - mean * mean, 0.0)
    return {"estimate": mean, "std_error": math.sqrt(var / m)}


def trace_distance_pure(rho, sigma):
    """Exact trace distance sqrt(1 - F) between two pure Gaussian states."""
    if not (rho.is_pure and sigma.is_pure):
        raise DomainError("trace_distance_pure requires two pure states")
    return math.sqrt(max(0.0, 1.0 - fidelity_pure(rho, sigma)))


def _matrix_abs(delta, clamp=1e-12):
    vals, vecs = np.linalg.eigh(delta)
    vals = np.abs(vals)
    vals[vals < clamp] = 0.0
    return (vecs * vals) @ vecs.T


def perturbation_upper_bound(rho, sigma):
    """Trace-distance upper bound from the first/second-moment perturbation formula.

    ||S1^-1/2 dmu||_2 / (2 sqrt 2) + (1 + sqrt 3)/8 * Tr((S1^-1 + S2^-1)|S1 - S2|),
    minimized over the two labelings (the bound is valid for either).
    """

    def one_way(a, b):
        vals, vecs = np.linalg.eigh(a.sigma)
        inv_root = (vecs / np.sqrt(vals)) @ vecs.T
        mean_term = float(np.linalg.norm(inv_root @ (b.mu - a.mu))) / (2 * math.sqrt(2))
        inv_sum = np.linalg.inv(a.sigma) + np.linalg.inv(b.sigma)
        cov_term = (1 + math.sqrt(3)) / 8 * float(np.trace(inv_sum @ _matrix_abs(a.sigma - b.sigma)))
        return mean_term + cov_term

    return min(one_way(rho, sigma), one_way(sigma, rho))


def trace_distance_bounds(rho, sigma, budget=30000, rng=None):
    """Two-sided trace-distance bracket for a pair of Gaussian states.

    Upper: min(1, perturbation bound, exact value when both states are pure,
    and the one-sided-pure Fuchs-van de Graaf bound sqrt(1 - Tr(rho sigma))
    when exactly one state is pure). Lower: the best of (a) Monte-Carlo TV
    of general-dyne outcome laws with seeds Sigma_1, Sigma_2 and I/2 (each
    reported at estimate - 3 sigma, a statistical rather than certified
    bound) and (b) the two-outcome vacuum-test gap
    |p_vac(rho) - p_vac(sigma)|. The lower edge is clamped to the upper edge.
    """
    if rho.n != sigma.n:
        raise DomainError("states have different mode counts")
    both_pure = rho.is_pure and sigma.is_pure
    if both_pure:
        exact = trace_distance_pure(rho, sigma)
        upper = exact
        upper_method = "exact-pure"
    else:
        upper = min(1.0, perturbation_upper_bound(rho, sigma))
        upper_method = "perturbation-bound"
        if rho.is_pure or sigma.is_pure:
            # sqrt(1 - F) with F = Tr(rho sigma): Uhlmann fidelity when one
            # state is pure, so this is the Fuchs-van de Graaf upper bound.
            fvg = math.sqrt(max(0.0, 1.0 - fidelity_pure(rho, sigma)))
            if fvg < upper:
                upper = fvg
                upper_method = "fuchs-van-de-graaf-pure"

    lower = abs(vacuum_probability(rho) - vacuum_probability(sigma))
    lower_method = "vacuum-test"
    if budget and budget > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        seeds = [rho.sigma, sigma.sigma, 0.5 * np.eye(2 * rho.n)]
        per_seed = max(1000, budget // len(seeds))
        for tag, seed in zip(("seed-sigma1", "seed-sigma2", "seed-heterodyne"), seeds):
            p = GaussianDistribution(rho.mu, rho.sigma + seed)
            q = GaussianDistribution(sigma.mu, sigma.sigma + seed)
            mc = tv_monte_carlo(p, q, per_seed, rng)
            candidate = mc["estimate"] - 3 * mc["std_error"]
            if candidate > lower:
                lower = candidate
                lower_method = f"general-dyne-mc({tag})-3se"
    if both_pure and exact > lower:
        lower = exact
        lower_method = "exact-pure"
    lower = max(0.0, min(lower, upper))
    return DistanceBracket(
        lower=lower, upper=upper, lower_method=lower_method, upper_method=upper_method,
        proviso_met=True,
    )


def wigner_tv_trace_bracket(n, pure):
    """Multiplicative constants relating Wigner-TV and trace distance.

    Lower side: D_tr >= (sqrt2/400) TV(W), valid when D_tr <= sqrt2/240000.
    Upper side: D_tr <= c TV(W) with c = 150 for pure pairs and
    c = 100 (1/sqrt2 + (1+sqrt3)/4 sqrt(2n)) for mixed pairs, valid when
    TV(W) < 1/600.
    """
    if n < 1:
        raise DomainError(f"mode count must be >= 1, got {n}")
    if pure:
        upper = WIGNER_PURE_UPPER_CONSTANT
    else:
        upper = 100.0 * (1.0 / math.sqrt(2.0) + (1 + math.sqrt(3)) / 4.0 * math.sqrt(2.0 * n))
    return {
        "n": n,
        "pure": bool(pure),
        "lower_constant": WIGNER_LOWER_CONSTANT,
        "upper_constant": upper,
        "lower_proviso_max_trace_distance": WIGNER_LOWER_PROVISO,
        "upper_proviso_max_wigner_tv": WIGNER_UPPER_PROVISO,
    }


def symmetrized_relative_entropy(rho, sigma):
    """D(rho||sigma) + D(sigma||rho) = Tr[(S1 - S2)(H2 - H1)] for zero-mean states.

    Raises:
        DomainError: nonzero mean.
        DegenerateStateError: either state pure or near-pure (the trace
            formula needs both Hamiltonian matrices).
    """
    if np.max(np.abs(rho.mu)) > 0 or np.max(np.abs(sigma.mu)) > 0:
        raise DomainError("symmetrized relative entropy requires zero-mean states")
    H1 = hamiltonian_matrix(rho.sigma)
    H2 = hamiltonian_matrix(sigma.sigma)
    value = float(np.trace((rho.sigma - sigma.sigma) @ (H2 - H1)))
    return max(0.0, value)


def holevo_upper_bound(ensemble, copies):
    """Upper bound on the Holevo quantity of {p_a, rho_a^(x) copies}.

    chi <= copies * sum_{a,a'} p_a p_a' Tr[(S_a - S_a')(H_a' - H_a)]; all
    members must be zero-mean and non-degenerate.
    """
    weights = np.array([w for w, _ in ensemble], dtype=float)
    if weights.size == 0:
        raise DomainError("ensemble is empty")
    if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
        raise DomainError("ensemble weights must be a probability vector")
    states = [s for _, s in ensemble]
    for s in states:
        if np.max(np.abs(s.mu)) > 0:
            raise DomainError("ensemble members must be zero-mean")
    hams = [hamiltonian_matrix(s.sigma) for s in states]
    total = 0.0
    for a, (wa, Ha) in enumerate(zip(weights, hams)):
        for b, (wb, Hb) in enumerate(zip(weights, hams)):
            if a == b:
                continue
            total += wa * wb * float(np.trace((states[a].sigma - states[b].sigma) @ (Hb - Ha)))
    return copies * max(0.0, total)
