"""Learning algorithms for Gaussian states.

Estimation primitives (heterodyne moment estimators, physical and pure
projections), the adaptive unsqueezing loop, the Wigner-distribution
learner, the pure-state learner, the non-adaptive single-mode algorithm
(random-angle homodyne with a condition-number branch), the
purification-based passive learner, and the energy-naive heterodyne
baseline.

Every learner owns its StateOracle for the duration of a call and reports
per-stage budgets in its diagnostics; the oracle's consumed-copies delta
always equals their sum.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import constants
from .divergences import GaussianDistribution
from .errors import (
    AbortNoAngle,
    DegenerateGeometryError,
    DomainError,
    LearnError,
)
from .measurement import GeneralDyneSeed, HomodyneSetting, StateOracle, heterodyne_seed
from .states import (
    GaussianState,
    apply_symplectic,
    purification_covariance,
    reduce_state,
    embed_symplectic,
)
from .ensembles import passivity_check
from .symplectic import (
    random_orthogonal_symplectic,
    require_symmetric,
    williamson,
)


@dataclass(frozen=True)
class TomographyResult:
    """Outcome of a state learner: the estimate plus budget bookkeeping."""

    estimate: GaussianState
    copies_used: int
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class WignerLearnResult:
    """Outcome of the Wigner-distribution learner (a classical Gaussian)."""

    estimate: GaussianDistribution
    copies_used: int
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# moment estimators and projections


def heterodyne_estimate(samples):
    """Empirical (mu_hat, sigma_hat_raw) from 2m heterodyne outcomes.

    mu_hat averages the first m outcomes; sigma_hat_raw is the
    paired-difference covariance minus the heterodyne noise:
    sum (v_{2i} - v_{2i-1})(v_{2i} - v_{2i-1})^T / (2m) - I/2.
    The raw covariance may be unphysical; callers project.
    """
    return general_dyne_estimate(samples, 0.5 * np.eye(np.asarray(samples).shape[1]))


def general_dyne_estimate(samples, seed_cov):
    """Moment estimators for general-dyne outcomes with known seed covariance."""
    v = np.asarray(samples, dtype=float)
    if v.ndim != 2 or v.shape[0] < 2 or v.shape[0] % 2 != 0:
        raise DomainError("need an even number (>= 2) of outcome vectors")
    m = v.shape[0] // 2
    mu_hat = v[:m].mean(axis=0)
    diffs = v[1::2] - v[0::2]
    sigma_hat = diffs.T @ diffs / (2 * m) - np.asarray(seed_cov)
    return mu_hat, 0.5 * (sigma_hat + sigma_hat.T)


def _floor_eigenvalues(sigma, floor):
    vals, vecs = np.linalg.eigh(sigma)
    if vals[0] >= floor:
        return sigma
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T


def project_to_physical(sigma_raw):
    """Clamp the symplectic spectrum up to 1/2: the baseline repair map.

    Accepts any symmetric matrix (possibly non-PD); output is a valid
    covariance and already-valid inputs are fixed points.
    """
    sigma = require_symmetric(np.asarray(sigma_raw, dtype=float), atol=1e-8)
    scale = max(1.0, float(np.max(np.abs(sigma))))
    sigma = _floor_eigenvalues(sigma, 1e-9 * scale)
    w = williamson(sigma)
    nu = np.maximum(w.nu, 0.5)
    if nu[0] == w.nu[0] and np.all(nu == w.nu):
        return sigma
    D = np.diag(np.concatenate([nu, nu]))
    out = w.S @ D @ w.S.T
    return 0.5 * (out + out.T)


def pure_projection_factor(sigma_raw):
    """Williamson-based pure projection: (Sigma_pure, S) with Sigma_pure = S S^T / 2."""
    sigma = require_symmetric(np.asarray(sigma_raw, dtype=float), atol=1e-8)
    w = williamson(sigma)  # raises DecompositionError on non-PD input
    pure = 0.5 * w.S @ w.S.T
    return 0.5 * (pure + pure.T), w.S


def project_to_pure(sigma_raw):
    """Project a symmetric PD matrix to the nearest-shape pure covariance S S^T / 2."""
    pure, _ = pure_projection_factor(sigma_raw)
    return pure


# ---------------------------------------------------------------------------
# adaptive unsqueezing


def unsqueeze_round_cap(E):
    return math.ceil(math.log2(math.log2(max(4.0 * E, 4.1)))) + constants.UNSQUEEZE_EXTRA_ROUNDS


def adaptive_unsqueeze(oracle, E, delta):
    """Learn a symplectic S such that S^-1 Sigma S^-T is well conditioned.

    Contract (checked statistically in tests, not per call): with
    probability >= 1 - delta over seeds, the unsqueezed covariance
    Sigma' = S^-1 Sigma S^-T satisfies ||Sigma'^-1||_op <= 4, given the
    promise ||Sigma||_op <= E.

    The loop recursively aligns a pure measurement seed with the unknown
    state: each round measures with the current seed V_t, re-estimates the
    covariance by moment matching (subtracting V_t), and sets V_{t+1} to the
    pure projection of the repaired estimate. It stops when the whitened
    seed update stabilizes, or after ceil(log2 log2 (4E)) + 3 rounds.
    """
    if E <= 1:
        raise DomainError(f"energy promise must exceed 1, got {E}")
    n = oracle.n
    cap = unsqueeze_round_cap(E)
    start = oracle.consumed
    V = 0.5 * np.eye(2 * n)
    S = np.eye(2 * n)
    round_budgets = []
    delta_t = delta / cap
    m_t = math.ceil(constants.UNSQUEEZE_SAMPLE_COEFF * (n + math.log(1.0 / delta_t)))
    seed_floor = 1.0 / (8.0 * E)  # the promise bounds useful seed squeezing
    for t in range(1, cap + 1):
        samples = oracle.sample_general_dyne(GeneralDyneSeed(V), 2 * m_t)
        round_budgets.append(2 * m_t)
        _, sigma_t = general_dyne_estimate(samples, V)
        blended = sigma_t + constants.UNSQUEEZE_DAMPING * V
        repaired = _floor_eigenvalues(project_to_physical(blended), seed_floor)
        V_new, S_new = pure_projection_factor(repaired)
        vals, vecs = np.linalg.eigh(V)
        inv_root = (vecs / np.sqrt(vals)) @ vecs.T
        ratio = np.linalg.eigvalsh(inv_root @ V_new @ inv_root)
        spread = float(ratio[-1] / ratio[0])
        V, S = V_new, S_new
        if spread <= constants.UNSQUEEZE_STABLE_RATIO:
            break
    diagnostics = {
        "rounds": len(round_budgets),
        "round_cap": cap,
        "round_budgets": round_budgets,
        "copies": oracle.consumed - start,
        "final_seed_spread": spread,
    }
    return S, diagnostics


# ---------------------------------------------------------------------------
# Wigner and pure-state learners


def _heterodyne_stage(oracle, n, eps, delta):
    m = math.ceil(
        (
            constants.PURE_HETERODYNE_COEFF * n * n
            + constants.PURE_HETERODYNE_LOG_COEFF * n * math.log(1.0 / delta)
        )
        / eps**2
    )
    samples = oracle.sample_general_dyne(heterodyne_seed(n), 2 * m)
    mu_hat, sigma_raw = heterodyne_estimate(samples)
    return mu_hat, sigma_raw, 2 * m


def learn_wigner(oracle, n, E, eps, delta):
    """Learn the Wigner distribution of a Gaussian state to TV distance eps.

    Unsqueeze, estimate moments by heterodyne, and map the classical Gaussian
    estimate back through the learned symplectic: N(S mu_hat, S Sigma_hat S^T).
    """
    if oracle.n != n:
        raise DomainError(f"oracle is on {oracle.n} modes, expected {n}")
    start = oracle.consumed
    S, unsq_diag = adaptive_unsqueeze(oracle, E, delta / 2)
    unsqueezed = oracle.transformed(np.linalg.inv(S))
    mu_hat, sigma_raw, het_copies = _heterodyne_stage(unsqueezed, n, eps, delta / 2)
    repaired = False
    if np.linalg.eigvalsh(sigma_raw)[0] <= 1e-9:
        sigma_raw = _floor_eigenvalues(sigma_raw, 1e-9)
        repaired = True
    estimate = GaussianDistribution(S @ mu_hat, S @ sigma_raw @ S.T)
    copies = oracle.consumed - start
    diagnostics = {
        "stage_budgets": {"unsqueeze": unsq_diag["copies"], "heterodyne": het_copies},
        "unsqueeze": unsq_diag,
        "pd_repair": repaired,
    }
    return WignerLearnResult(estimate=estimate, copies_used=copies, diagnostics=diagnostics)


def learn_pure(oracle, n, E, eps, delta):
    """Learn a pure Gaussian state to trace distance eps (Gaussian measurements).

    Pipeline: adaptively unsqueeze, heterodyne the unsqueezed copies, project
    the raw covariance to a pure one through its Williamson form, and undo
    the unsqueezing on the estimate.
    """
    if oracle.n != n:
        raise DomainError(f"oracle is on {oracle.n} modes, expected {n}")
    start = oracle.consumed
    S, unsq_diag = adaptive_unsqueeze(oracle, E, delta / 2)
    unsqueezed = oracle.transformed(np.linalg.inv(S))
    mu_hat, sigma_raw, het_copies = _heterodyne_stage(unsqueezed, n, eps, delta / 2)
    try:
        sigma_pure = project_to_pure(project_to_physical(sigma_raw))
    except Exception as exc:
        raise LearnError(f"pure projection failed: {exc}", stage="projection") from exc
    estimate = apply_symplectic(GaussianState(mu_hat, sigma_pure), S)
    copies = oracle.consumed - start
    diagnostics = {
        "stage_budgets": {"unsqueeze": unsq_diag["copies"], "heterodyne": het_copies},
        "unsqueeze": unsq_diag,
    }
    return TomographyResult(estimate=estimate, copies_used=copies, diagnostics=diagnostics)


def learn_passive_purified(oracle, n, E, eps, delta, rng):
    """Learn a passive Gaussian state via the random-purification route.

    Simulated at covariance level: build the Gaussian purification of the
    hidden truth, randomize its purifying half by a Haar orthogonal
    symplectic, run the pure-state learner on the 2n-mode purification
    (energy promise 4E), and reduce the estimate back to the first n modes.
    The channel itself consumes no extra copies: every purified copy drawn
    consumes one base copy through the shared ledger.

    Raises:
        DomainError: if the hidden truth fails the passivity fixture check.
    """
    if oracle.n != n:
        raise DomainError(f"oracle is on {oracle.n} modes, expected {n}")
    truth = oracle._truth
    if np.max(np.abs(truth.mu)) > 1e-12 or not passivity_check(truth.sigma):
        raise DomainError("hidden truth is not a passive Gaussian state")
    start = oracle.consumed
    psi = purification_covariance(truth)
    O = random_orthogonal_symplectic(n, rng)
    S_emb = embed_symplectic(O, range(n, 2 * n), 2 * n)
    psi = apply_symplectic(psi, S_emb)
    purified_oracle = oracle.replaced(psi)
    inner = learn_pure(purified_oracle, 2 * n, 4 * E, eps, delta)
    estimate = reduce_state(inner.estimate, range(n))
    copies = oracle.consumed - start
    diagnostics = {
        "stage_budgets": dict(inner.diagnostics["stage_budgets"]),
        "purified_modes": 2 * n,
        "purified_op_norm": float(np.linalg.norm(psi.sigma, 2)),
        "inner": inner.diagnostics,
    }
    return TomographyResult(estimate=estimate, copies_used=copies, diagnostics=diagnostics)


def heterodyne_baseline_learn(oracle, n, eps, copies=None):
    """Energy-naive non-adaptive heterodyne estimate (the comparison arm).

    Measures ``copies`` heterodyne outcomes (default 400 n^2 / eps^2, rounded
    even), forms the moment estimators, and repairs to a physical covariance.
    """
    if oracle.n != n:
        raise DomainError(f"oracle is on {oracle.n} modes, expected {n}")
    if copies is None:
        copies = math.ceil(constants.BASELINE_HETERODYNE_COEFF * n * n / eps**2)
    copies = int(copies) + (int(copies) % 2)
    start = oracle.consumed
    samples = oracle.sample_general_dyne(heterodyne_seed(n), copies)
    mu_hat, sigma_raw = heterodyne_estimate(samples)
    estimate = GaussianState(mu_hat, project_to_physical(sigma_raw))
    return TomographyResult(
        estimate=estimate,
        copies_used=oracle.consumed - start,
        diagnostics={"stage_budgets": {"heterodyne": copies}},
    )


# ---------------------------------------------------------------------------
# the non-adaptive single-mode algorithm


@dataclass(frozen=True)
class AlgS1Params:
    """Parameters of the non-adaptive single-mode learner.

    K random homodyne angles, 2T shots per angle with squeezing c = E,
    N0 heterodyne copies. ``uniform_angles`` replaces the random angles by
    the uniform grid i pi / K and ``use_heterodyne=False`` drops the
    heterodyne arm entirely; both are experimental switches with no accuracy
    guarantee claimed, default off.
    """

    K: int
    T: int
    N0: int
    E: float
    uniform_angles: bool = False
    use_heterodyne: bool = True

    def __post_init__(self):
        if self.K < 1 or self.T < 1:
            raise DomainError("K and T must be >= 1")
        if self.use_heterodyne and self.N0 < 1:
            raise DomainError("N0 must be >= 1 when the heterodyne arm is enabled")
        if self.E <= 2:
            raise DomainError(f"energy parameter must exceed 2, got {self.E}")

    @property
    def total_copies(self):
        return 2 * self.K * self.T + (self.N0 if self.use_heterodyne else 0)


def alg_s1_params(E, eps, **flags):
    """Budget shape K = Theta(E), T = Theta(log E / eps^2), N0 = Theta(1/eps^2)."""
    K = math.ceil(constants.ALG_S1_ANGLE_COEFF * E + constants.ALG_S1_ANGLE_BASE)
    T = math.ceil(
        (constants.ALG_S1_SHOT_COEFF * math.log(E) + constants.ALG_S1_SHOT_BASE) / eps**2
    )
    N0 = math.ceil(constants.ALG_S1_HETERODYNE_COEFF / eps**2)
    return AlgS1Params(K=K, T=T, N0=N0, E=E, **flags)


def angle_dist_pi(x):
    """|x|_pi: distance of x to the nearest multiple of pi."""
    r = np.mod(x, np.pi)
    return np.minimum(r, np.pi - r)


def wrap_angle_offset(x):
    """Wrap an angle difference into (-pi/2, pi/2]."""
    r = np.mod(x + np.pi / 2, np.pi) - np.pi / 2
    return r


def in_wrapped_interval(phi, lo, hi):
    """Membership of phi in [lo, hi]_pi, the union of [lo + k pi, hi + k pi]."""
    width = hi - lo
    if width < 0:
        raise DomainError("interval endpoints are reversed")
    if width >= np.pi:
        return np.ones_like(np.asarray(phi, dtype=float), dtype=bool)
    return np.mod(np.asarray(phi, dtype=float) - lo, np.pi) <= width


def plan_alg_s1_settings(params, rng):
    """Measurement plan: the K homodyne angles (a pure function of params and rng)."""
    if params.uniform_angles:
        return np.arange(params.K) * np.pi / params.K
    return rng.uniform(0.0, np.pi, size=params.K)


def solve_squeezing_axis(phi_min, s_min, phi_plus, s_plus, phi_minus, s_minus, kappa_hat):
    """Invert the projected-variance model at three angles.

    Given homodyne variance estimates at phi_min (the empirical minimum) and
    at two flanking angles, solves the ratio equation
    f(theta) = (sin^2(phi_+ - theta) - sin^2(phi_min - theta)) /
               (sin^2(phi_- - theta) - sin^2(phi_min - theta))
    for theta near phi_min, then recovers Delta = a - b, b, a.

    Returns:
        dict with theta, a, b, delta, and a 'root_fallback' flag set when no
        sign change was bracketed (theta then defaults to phi_min).
    """
    h = kappa_hat**-0.5
    d_plus = wrap_angle_offset(phi_plus - phi_min)
    d_minus = wrap_angle_offset(phi_minus - phi_min)
    ratio = (s_plus - s_min) / (s_minus - s_min)

    def g(u):
        return (np.sin(d_plus - u) ** 2 - np.sin(u) ** 2) / (
            np.sin(d_minus - u) ** 2 - np.sin(u) ** 2
        ) - ratio

    root = None
    fallback = False
    if g(0.0) == 0.0:
        root = 0.0
    else:
        for span in (1.2 * h, 2.0 * h, 3.0 * h):
            lo, hi = -span, span
            try:
                if np.sign(g(lo)) != np.sign(g(hi)):
                    root = brentq(g, lo, hi, xtol=1e-14)
                    break
            except ValueError:
                continue
        if root is None:
            root = 0.0
            fallback = True
    theta = float(np.mod(phi_min + root, np.pi))

    den = np.sin(d_plus - root) ** 2 - np.sin(-root) ** 2
    if abs(den) < 1e-12:
        raise LearnError("variance-model inversion is singular", stage="solve-sigma")
    delta = (s_plus - s_min) / den
    b = s_min - delta * np.sin(-root) ** 2
    a = b + delta
    return {"theta": theta, "a": float(a), "b": float(b), "delta": float(delta),
            "root_fallback": fallback}


def mean_from_two_angles(phi_1, mu_1, phi_2, mu_2):
    """Recover the mean vector from projected means along two angles."""
    gap = np.sin(phi_2 - phi_1)
    if abs(gap) < 1e-6:
        raise DegenerateGeometryError(
            f"angles {phi_1:.6f}, {phi_2:.6f} are nearly parallel"
        )
    nu_1 = mu_1
    nu_2 = (mu_2 - mu_1 * np.cos(phi_2 - phi_1)) / gap
    e_1 = np.array([np.cos(phi_1), np.sin(phi_1)])
    e_perp = np.array([-np.sin(phi_1), np.cos(phi_1)])
    return nu_1 * e_1 + nu_2 * e_perp


KAPPA_BRANCH_THRESHOLD = 24.0


def process_alg_s1(angles, mu_hats, sigma_hats, het_samples, params):
    """Classical data processing of the non-adaptive algorithm (pure function).

    Args:
        angles: the K homodyne angles.
        mu_hats, sigma_hats: per-angle projected moment estimates.
        het_samples: (N0, 2) heterodyne outcomes (may be empty).
        params: AlgS1Params.

    Returns:
        (GaussianState estimate, diagnostics dict).

    Raises:
        AbortNoAngle: if a required flanking-angle window is empty.
    """
    angles = np.asarray(angles, dtype=float)
    mu_hats = np.asarray(mu_hats, dtype=float)
    sigma_hats = np.asarray(sigma_hats, dtype=float)
    i_min = int(np.argmin(sigma_hats))
    s_min_raw = float(sigma_hats[i_min])
    s_max = float(np.max(sigma_hats))
    # the kappa <= E^2 promise together with det Sigma >= 1/4 forces the true
    # minimum variance to be >= 1/(2E); flooring the empirical minimum just
    # below that caps the argmin selection bias, and the promise itself caps
    # kappa_hat (keeping the flanking-angle windows from shrinking below 1/E)
    s_min = max(s_min_raw, 1.0 / (2.1 * params.E))
    kappa_hat = min(s_max / s_min, params.E**2)
    diagnostics = {"kappa_hat": kappa_hat, "sigma_min_raw": s_min_raw, "sigma_max": s_max}

    if kappa_hat < KAPPA_BRANCH_THRESHOLD and params.use_heterodyne:
        mu_hat, sigma_raw = heterodyne_estimate(het_samples)
        estimate = GaussianState(mu_hat, project_to_physical(sigma_raw))
        diagnostics["branch"] = "heterodyne"
        return estimate, diagnostics

    diagnostics["branch"] = "squeezed"
    phi_min = float(angles[i_min])
    h = kappa_hat**-0.5
    offsets = wrap_angle_offset(angles - phi_min)
    plus_mask = (offsets >= 3 * h) & (offsets <= 4 * h)
    minus_mask = (offsets <= -3 * h) & (offsets >= -4 * h)
    if not plus_mask.any() or not minus_mask.any():
        raise AbortNoAngle(
            f"no sampled angle in a flanking window of width {h:.4f} around {phi_min:.4f}"
        )
    # prefer the outer edge of each window: the wider lever arm steepens the
    # ratio curve f and reduces the axis-angle noise
    i_plus = int(np.flatnonzero(plus_mask)[np.argmax(offsets[plus_mask])])
    i_minus = int(np.flatnonzero(minus_mask)[np.argmin(offsets[minus_mask])])

    solved = solve_squeezing_axis(
        phi_min, s_min, float(angles[i_plus]), float(sigma_hats[i_plus]),
        float(angles[i_minus]), float(sigma_hats[i_minus]), kappa_hat,
    )
    theta = solved["theta"]
    # the same promise floor applies to the solved minimum variance itself
    b_hat = max(solved["b"], 1.0 / (2.1 * params.E))
    a_hat = b_hat + max(solved["delta"], 0.0)
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s], [s, c]])
    sigma_raw = R @ np.diag([b_hat, a_hat]) @ R.T

    i_1 = int(np.argmin(angle_dist_pi(angles - theta)))
    i_2 = int(np.argmin(angle_dist_pi(angles - theta - np.pi / 2)))
    mu_hat = mean_from_two_angles(
        float(angles[i_1]), float(mu_hats[i_1]), float(angles[i_2]), float(mu_hats[i_2])
    )

    estimate = GaussianState(mu_hat, project_to_physical(sigma_raw))
    diagnostics.update(
        {
            "theta_hat": theta,
            "a_hat": a_hat,
            "b_hat": b_hat,
            "root_fallback": solved["root_fallback"],
            "angle_indices": {"min": i_min, "plus": i_plus, "minus": i_minus,
                              "mean_1": i_1, "mean_2": i_2},
        }
    )
    return estimate, diagnostics


def learn_single_mode_nonadaptive(oracle, params, eps, rng):
    """Non-adaptive learning of a single-mode Gaussian state.

    Collects all data first (K angles x 2T homodyne shots at c = E, plus N0
    heterodyne copies); the measurement settings are a pure function of
    (params, rng) and never depend on outcomes. Processing branches on the
    rough condition-number estimate kappa_hat: below 24 the heterodyne
    moment estimate is returned, otherwise the squeezing axis is solved from
    three post-selected angles and the mean from two more.

    Raises:
        AbortNoAngle: when a required angle window is empty (a legitimate
            algorithm outcome, counted as failure in success statistics).
    """
    if oracle.n != 1:
        raise DomainError("the non-adaptive algorithm is single-mode only")
    del eps  # the budget is fixed by params; eps enters through alg_s1_params
    angles = plan_alg_s1_settings(params, rng)
    start = oracle.consumed

    T = params.T
    mu_hats = np.empty(params.K)
    sigma_hats = np.empty(params.K)
    inv_e = 1.0 / params.E
    for i, phi in enumerate(angles):
        z = oracle.sample_homodyne(HomodyneSetting(phi=float(phi), c=params.E), 2 * T)
        mu_hats[i] = z[:T].mean()
        sigma_hats[i] = float(np.sum((z[:T] - z[T:]) ** 2) / (2 * T)) - inv_e
    if params.use_heterodyne:
        het = oracle.sample_general_dyne(heterodyne_seed(1), params.N0)
    else:
        het = np.empty((0, 2))

    estimate, diagnostics = process_alg_s1(angles, mu_hats, sigma_hats, het, params)
    copies = oracle.consumed - start
    diagnostics["stage_budgets"] = {
        "homodyne": 2 * params.K * params.T,
        "heterodyne": params.N0 if params.use_heterodyne else 0,
    }
    return TomographyResult(estimate=estimate, copies_used=copies, diagnostics=diagnostics)
