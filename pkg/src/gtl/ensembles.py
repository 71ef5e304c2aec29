"""Hard-instance Gaussian state families and their separation reports.

Four constructions drive the package's lower-bound demonstrations. Each is
built from a family of n-by-s column-orthogonal matrices U_a with small
pairwise overlaps ||U_a^T U_b||_F^2 <= n/18 (s = ceil(n/9)):

* ``passive-c1``:   Sigma_a = I/2 + (eps/2n) diag-block(U_a U_a^T) twice,
  a passive family separated by the vacuum-test gap >= eps/54 (eps <= 5);
* ``pure-c2``:      Sigma'_a = diag-block(I - eps/(sqrt n + eps) U_a U_a^T,
  I + eps/sqrt n U_a U_a^T)/2, pure, pairwise D_tr >= eps/(6 sqrt 5)
  (eps <= 1);
* ``pure-scaled-c2``: 2 Sigma'_a, the non-degenerate scaled variant used by
  the symmetrized-relative-entropy / Holevo route;
* ``heterodyne-hard-c3``: diag-block(lambda I, (I + eps/n U_a U_a^T)/lambda)/2
  with ||Sigma||_op = lambda/2, vacuum-test gap >= eps/90 (eps <= 1);
* ``squeezed-pair-e1``: the two single-mode states R_phi diag(a, 1/a) R_phi^T/2
  and R_phi diag(a, (1+2 eps)/a) R_phi^T/2 with gap 1 - (1+eps)^{-1/2}.

At desk scale the family size M is checked exhaustively pair by pair; the
exponentially-large-M existence statements are out of scope.
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import ks_2samp

from .divergences import (
    GaussianDistribution,
    gaussian_chi2,
    gaussian_kl,
    symmetrized_relative_entropy,
    trace_distance_pure,
)
from .errors import ConstructionFailure, DomainError
from .measurement import StateOracle
from .states import GaussianState, fidelity_pure, squeezed_state
from .symplectic import williamson

ORTHONORMALITY_ATOL = 1e-10


class EnsembleKind(Enum):
    PASSIVE_C1 = "passive-c1"
    PURE_C2 = "pure-c2"
    PURE_SCALED_C2_1 = "pure-scaled-c2"
    HETERODYNE_HARD_C3 = "heterodyne-hard-c3"
    SQUEEZED_PAIR_E1 = "squeezed-pair-e1"


def family_width(n):
    """s = ceil(n/9), the column count of the overlap family."""
    return math.ceil(n / 9)


@dataclass(frozen=True)
class OverlapFamily:
    """A verified family of n-by-s column-orthogonal matrices with small overlaps."""

    n: int
    members: tuple
    max_overlap_sq: float

    @property
    def s(self):
        return self.members[0].shape[1]

    @property
    def size(self):
        return len(self.members)


def make_overlap_family(n, members):
    """Validate and wrap explicitly given family members.

    Checks each U_a^T U_a = I_s to 1e-10 and every pairwise overlap against
    the n/18 bound.
    """
    members = tuple(np.asarray(U, dtype=float) for U in members)
    s = family_width(n)
    bound = n / 18.0
    max_sq = 0.0
    for U in members:
        if U.shape != (n, s):
            raise DomainError(f"family member has shape {U.shape}, expected ({n}, {s})")
        if np.max(np.abs(U.T @ U - np.eye(s))) > ORTHONORMALITY_ATOL:
            raise DomainError("family member columns are not orthonormal to 1e-10")
    for Ua, Ub in itertools.combinations(members, 2):
        overlap = float(np.sum((Ua.T @ Ub) ** 2))
        max_sq = max(max_sq, overlap)
        if overlap > bound + 1e-12:
            raise DomainError(f"pairwise overlap {overlap:.6f} exceeds n/18 = {bound:.6f}")
    return OverlapFamily(n=n, members=members, max_overlap_sq=max_sq)


def sample_overlap_family(n, M, max_tries, rng):
    """Rejection-sample an overlap family of size M.

    Candidates are Q factors of n-by-s Gaussian matrices; a candidate is
    accepted if its overlap with every accepted member stays within n/18.

    Raises:
        ConstructionFailure: after ``max_tries`` candidate draws (carries the
            best violating overlap seen).
    """
    if n < 10:
        raise DomainError(f"overlap family needs n >= 10 modes, got {n}")
    s = family_width(n)
    bound = n / 18.0
    accepted = []
    best_violation = None
    tries = 0
    while len(accepted) < M:
        if tries >= max_tries:
            raise ConstructionFailure(
                f"gave up after {max_tries} tries with {len(accepted)}/{M} members",
                best_overlap=best_violation,
            )
        tries += 1
        g = rng.standard_normal((n, s))
        q, _ = np.linalg.qr(g)
        worst = 0.0
        for U in accepted:
            worst = max(worst, float(np.sum((U.T @ q) ** 2)))
            if worst > bound:
                break
        if worst > bound:
            best_violation = worst if best_violation is None else min(best_violation, worst)
            continue
        accepted.append(q)
    return make_overlap_family(n, accepted)


def orthogonal_complement(U):
    """Complete U to an orthonormal basis; returns the complement W.

    Deterministic completion: Gram-Schmidt of the standard basis vectors in
    index order against the running basis.
    """
    n, s = U.shape
    basis = [U[:, j].copy() for j in range(s)]
    complement = []
    for i in range(n):
        if len(basis) == n:
            break
        v = np.zeros(n)
        v[i] = 1.0
        for b in basis:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            v /= norm
            basis.append(v)
            complement.append(v)
    if len(complement) != n - s:
        raise ConstructionFailure("deterministic basis completion failed")
    return np.column_stack(complement)


def _block_pair(top, bottom):
    n = top.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = top
    out[n:, n:] = bottom
    return out


@dataclass(frozen=True)
class Ensemble:
    """States built by :func:`build_ensemble`, with their construction data."""

    kind: EnsembleKind
    states: tuple
    family: object  # OverlapFamily or None for the squeezed pair
    params: dict


def _check_eps(eps, cap, kind):
    if not 0 < eps <= cap:
        raise DomainError(f"{kind.value} requires 0 < eps <= {cap}, got {eps}")


def build_ensemble(kind, family=None, *, eps, lam=None, a=None, phi=0.0):
    """Construct one of the hard families as a list of Gaussian states.

    Args:
        kind: EnsembleKind (or its string value).
        family: OverlapFamily (required for all kinds except the squeezed pair).
        eps: separation parameter (range enforced per kind).
        lam: squeezing scale of the heterodyne-hard family (> 1).
        a: large principal variance (= 2 E-bar) of the squeezed pair.
        phi: squeezing angle of the squeezed pair.
    """
    kind = EnsembleKind(kind)
    if kind is EnsembleKind.SQUEEZED_PAIR_E1:
        if a is None or a <= 1:
            raise DomainError("squeezed pair needs a > 1")
        _check_eps(eps, 1.0 / 3.0, kind)
        s0 = squeezed_state(a=0.5 * a, b=0.5 / a, theta=phi + np.pi / 2)
        s1 = squeezed_state(a=0.5 * a, b=(0.5 + eps) / a, theta=phi + np.pi / 2)
        return Ensemble(kind, (s0, s1), None, {"eps": eps, "a": a, "phi": phi})

    if family is None:
        raise DomainError(f"{kind.value} requires an OverlapFamily")
    n = family.n
    states = []
    if kind is EnsembleKind.PASSIVE_C1:
        _check_eps(eps, 5.0, kind)
        for U in family.members:
            P = U @ U.T
            block = 0.5 * np.eye(n) + (eps / (2 * n)) * P
            states.append(GaussianState(np.zeros(2 * n), _block_pair(block, block)))
        params = {"eps": eps}
    elif kind in (EnsembleKind.PURE_C2, EnsembleKind.PURE_SCALED_C2_1):
        _check_eps(eps, 1.0, kind)
        scale = 2.0 if kind is EnsembleKind.PURE_SCALED_C2_1 else 1.0
        root = math.sqrt(n)
        for U in family.members:
            P = U @ U.T
            x_block = 0.5 * (np.eye(n) - (eps / (root + eps)) * P)
            p_block = 0.5 * (np.eye(n) + (eps / root) * P)
            states.append(GaussianState(np.zeros(2 * n), scale * _block_pair(x_block, p_block)))
        params = {"eps": eps}
    elif kind is EnsembleKind.HETERODYNE_HARD_C3:
        _check_eps(eps, 1.0, kind)
        if lam is None or lam <= 2:
            raise DomainError("heterodyne-hard family needs lambda > 2")
        for U in family.members:
            P = U @ U.T
            x_block = 0.5 * lam * np.eye(n)
            p_block = 0.5 / lam * (np.eye(n) + (eps / n) * P)
            states.append(GaussianState(np.zeros(2 * n), _block_pair(x_block, p_block)))
        params = {"eps": eps, "lam": lam}
    else:  # pragma: no cover
        raise DomainError(f"unhandled ensemble kind {kind}")
    return Ensemble(kind, tuple(states), family, params)


def vacuum_test_gap(Ua, Ub, n, eps, exponent):
    """Analytic vacuum-test separation 1 - det(I + eps/(2n) W_a^T U_b U_b^T W_a)^exponent.

    This is the data-processing lower bound on the trace distance obtained by
    rotating into a's basis, tracing out the first s modes, and reading the
    vacuum outcome; ``exponent`` is -1 for the passive family (both quadrature
    blocks carry the bump) and -1/2 for the heterodyne-hard family.
    """
    Wa = orthogonal_complement(Ua)
    M = Wa.T @ Ub @ Ub.T @ Wa
    sign, logdet = np.linalg.slogdet(np.eye(M.shape[0]) + (eps / (2 * n)) * M)
    return float(1.0 - sign * np.exp(exponent * logdet))


def _heterodyne_law(state):
    n = state.n
    return GaussianDistribution(state.mu, state.sigma + 0.5 * np.eye(2 * n))


def separation_report(ensemble):
    """Analytic pairwise separation and divergence report for an ensemble.

    Returns a dict with ``pairs`` (one row per ordered-min pair: indices,
    analytic trace-distance lower bound, a per-kind KL-type divergence, and
    the family overlap), plus summary fields ``min_distance_lower_bound``
    and ``max_kl``. The per-kind divergence is tagged in ``kl_kind``:

    * passive-c1: classical KL of the Wigner distributions;
    * pure-c2: classical KL of the Wigner distributions;
    * pure-scaled-c2: symmetrized quantum relative entropy (trace formula);
    * heterodyne-hard-c3: classical KL of the heterodyne outcome laws;
    * squeezed-pair-e1: classical KL of the heterodyne outcome laws.
    """
    kind = ensemble.kind
    states = ensemble.states
    eps = ensemble.params["eps"]
    rows = []

    if kind is EnsembleKind.SQUEEZED_PAIR_E1:
        s0, s1 = states
        gap = 1.0 - (1.0 + eps) ** -0.5
        kl = gaussian_kl(_heterodyne_law(s1), _heterodyne_law(s0))
        chi2 = gaussian_chi2(_heterodyne_law(s1), _heterodyne_law(s0))
        rows.append(
            {"pair": (0, 1), "d_lower": gap, "kl": kl, "chi2": chi2, "overlap_sq": 0.0}
        )
        return {
            "kind": kind.value,
            "kl_kind": "heterodyne-outcome-kl",
            "pairs": rows,
            "min_distance_lower_bound": gap,
            "max_kl": kl,
        }

    family = ensemble.family
    n = family.n
    members = family.members
    if kind is EnsembleKind.PASSIVE_C1:
        kl_kind = "wigner-kl"
    elif kind is EnsembleKind.PURE_C2:
        kl_kind = "wigner-kl"
    elif kind is EnsembleKind.PURE_SCALED_C2_1:
        kl_kind = "symmetrized-relative-entropy"
    else:
        kl_kind = "heterodyne-outcome-kl"

    for a_idx, b_idx in itertools.combinations(range(len(states)), 2):
        Ua, Ub = members[a_idx], members[b_idx]
        overlap = float(np.sum((Ua.T @ Ub) ** 2))
        sa, sb = states[a_idx], states[b_idx]
        if kind is EnsembleKind.PASSIVE_C1:
            d_lower = max(
                vacuum_test_gap(Ua, Ub, n, eps, -1.0), vacuum_test_gap(Ub, Ua, n, eps, -1.0)
            )
            kl = gaussian_kl(
                GaussianDistribution(sa.mu, sa.sigma), GaussianDistribution(sb.mu, sb.sigma)
            )
        elif kind is EnsembleKind.PURE_C2:
            d_lower = trace_distance_pure(sa, sb)
            kl = gaussian_kl(
                GaussianDistribution(sa.mu, sa.sigma), GaussianDistribution(sb.mu, sb.sigma)
            )
        elif kind is EnsembleKind.PURE_SCALED_C2_1:
            # chain: D(rho_a, rho_b) >= (sqrt2/400) TV(W) and, for the pure
            # halves, TV(W) > D(sigma_a, sigma_b)/150 by scale invariance.
            pure_a = GaussianState(sa.mu, 0.5 * sa.sigma)
            pure_b = GaussianState(sb.mu, 0.5 * sb.sigma)
            d_pure = trace_distance_pure(pure_a, pure_b)
            d_lower = (math.sqrt(2.0) / 400.0) * d_pure / 150.0
            kl = symmetrized_relative_entropy(sa, sb)
        else:
            d_lower = max(
                vacuum_test_gap(Ua, Ub, n, eps, -0.5), vacuum_test_gap(Ub, Ua, n, eps, -0.5)
            )
            kl = gaussian_kl(_heterodyne_law(sa), _heterodyne_law(sb))
        rows.append({"pair": (a_idx, b_idx), "d_lower": d_lower, "kl": kl, "overlap_sq": overlap})

    return {
        "kind": kind.value,
        "kl_kind": kl_kind,
        "pairs": rows,
        "min_distance_lower_bound": min(r["d_lower"] for r in rows),
        "max_kl": max(r["kl"] for r in rows),
    }


def passivity_check(sigma, atol=1e-8):
    """True if the Williamson S of sigma is orthogonal within tolerance."""
    w = williamson(sigma)
    return bool(np.max(np.abs(w.S @ w.S.T - np.eye(sigma.shape[0]))) <= atol)


def classical_simulability_demo(member, seed, m, rng):
    """Positive-Wigner POVM simulation check on one ensemble member.

    Generates (a) m general-dyne outcomes through the measurement simulator
    and (b) m Wigner samples pushed through the seed-convolution
    post-processing (adding independent N(0, V) noise), then compares the
    two sets coordinate-wise with two-sample KS tests.

    Returns:
        dict with the two (m, 2n) sample sets, the per-coordinate KS
        p-values, the Bonferroni-corrected pass flag at significance 0.01,
        and the copies consumed by each route (always m each).
    """
    d = 2 * member.n
    oracle_a = StateOracle(member, rng)
    direct = oracle_a.sample_general_dyne(seed, m)
    consumed_a = oracle_a.consumed

    oracle_b = StateOracle(member, rng)
    wigner = oracle_b.sample_wigner(m)
    noise = _seed_noise(seed.V, m, rng)
    convolved = wigner + noise
    consumed_b = oracle_b.consumed

    p_values = np.array([ks_2samp(direct[:, j], convolved[:, j]).pvalue for j in range(d)])
    passed = bool(np.all(p_values >= 0.01 / d))
    return {
        "direct": direct,
        "convolved": convolved,
        "ks_pvalues": p_values,
        "passed": passed,
        "consumed": (consumed_a, consumed_b),
    }


def _seed_noise(V, m, rng):
    vals, vecs = np.linalg.eigh(V)
    L = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return (L @ rng.standard_normal((V.shape[0], m))).T
