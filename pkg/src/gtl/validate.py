"""Self-check suites behind the `validate` CLI subcommand.

Each suite is a list of named checks returning (name, passed, detail); the
CLI exits 1 if any check fails. These are product-surface smoke checks, a
faster mirror of the pytest suite's invariants.
"""

import math

import numpy as np

from . import fock
from .divergences import (
    GaussianDistribution,
    gaussian_chi2,
    gaussian_kl,
    mahalanobis_delta,
    symmetrized_relative_entropy,
    trace_distance_bounds,
    tv_monte_carlo,
    wigner_tv_trace_bracket,
)
from .ensembles import EnsembleKind, build_ensemble, make_overlap_family, separation_report
from .measurement import HomodyneSetting, StateOracle, heterodyne_seed, homodyne_moments
from .states import (
    GaussianState,
    apply_displacement,
    fidelity_pure,
    hamiltonian_matrix,
    purification_covariance,
    reduce_state,
    thermal_state,
    vacuum_state,
    von_neumann_entropy,
    wigner_pdf,
)
from .symplectic import (
    random_covariance,
    random_orthogonal_symplectic,
    symplectic_form,
    validate_covariance,
    williamson,
)


def _check(name, ok, detail=""):
    return (name, bool(ok), detail)


def suite_symplectic(rng):
    checks = []
    omega = symplectic_form(3)
    checks.append(_check("omega-antisymmetric", np.allclose(omega.T, -omega)))
    checks.append(_check("omega-squared", np.allclose(omega @ omega, -np.eye(6))))
    worst_res = worst_rec = worst_det = 0.0
    for _ in range(40):
        n = int(rng.integers(1, 4))
        V = random_covariance(n, 8.0, "mixed", rng)
        w = williamson(V)
        worst_res = max(worst_res, w.symplectic_residual)
        worst_rec = max(worst_rec, w.reconstruction_residual)
        if n == 1:
            worst_det = max(worst_det, abs(w.nu[0] - math.sqrt(np.linalg.det(V))))
    checks.append(_check("williamson-symplectic-residual", worst_res <= 1e-9, f"{worst_res:.2e}"))
    checks.append(_check("williamson-reconstruction", worst_rec <= 1e-8, f"{worst_rec:.2e}"))
    checks.append(_check("single-mode-nu-sqrt-det", worst_det <= 1e-10, f"{worst_det:.2e}"))
    K = random_orthogonal_symplectic(3, rng)
    checks.append(
        _check(
            "haar-orthogonal-symplectic",
            np.max(np.abs(K @ K.T - np.eye(6))) <= 1e-10
            and np.max(np.abs(K @ symplectic_form(3) @ K.T - symplectic_form(3))) <= 1e-10,
        )
    )
    checks.append(
        _check("vacuum-pure", validate_covariance(0.5 * np.eye(4)).is_pure)
    )
    return checks


def suite_states(rng):
    checks = []
    vac = vacuum_state(1)
    checks.append(_check("wigner-vacuum-origin", abs(wigner_pdf(vac, [0, 0]) - 1 / math.pi) < 1e-12))
    disp = apply_displacement(vac, [1.0, 0.0])
    checks.append(_check("coherent-fidelity", abs(fidelity_pure(vac, disp) - math.exp(-0.5)) < 1e-12))
    th = thermal_state(1.5)
    checks.append(_check("thermal-vacuum-prob", abs(fidelity_pure(vac, th) - 0.5) < 1e-12))
    H = hamiltonian_matrix(th.sigma)
    checks.append(_check("thermal-hamiltonian", np.allclose(H, 0.5 * math.log(2) * np.eye(2))))
    g1 = 1.5 * math.log(1.5) + 0.5 * math.log(2.0)
    checks.append(_check("entropy-nu-1", abs(von_neumann_entropy(np.eye(2)) - g1) < 1e-12))
    worst = 0.0
    for _ in range(20):
        sigma = random_covariance(2, 6.0, "mixed", rng)
        state = GaussianState(np.zeros(4), sigma)
        pure = purification_covariance(state)
        ok = (
            pure.is_pure
            and abs(np.trace(pure.sigma) - 2 * np.trace(sigma)) < 1e-10
            and np.linalg.norm(pure.sigma, 2) <= 4 * np.linalg.norm(sigma, 2) + 1e-9
            and np.max(np.abs(reduce_state(pure, [0, 1]).sigma - sigma)) < 1e-9
        )
        worst = max(worst, 0.0 if ok else 1.0)
    checks.append(_check("purification-invariants", worst == 0.0))
    return checks


def suite_divergences(rng):
    checks = []
    p = GaussianDistribution([0.0], [[1.0]])
    q = GaussianDistribution([1.0], [[1.0]])
    mc = tv_monte_carlo(p, q, 40000, rng)
    exact = math.erf(0.5 / math.sqrt(2))
    checks.append(
        _check("tv-mc-two-gaussians", abs(mc["estimate"] - exact) <= 4 * mc["std_error"],
               f"{mc['estimate']:.4f} vs {exact:.4f}")
    )
    ok = True
    for _ in range(25):
        A = random_covariance(1, 4.0, "mixed", rng)
        B = random_covariance(1, 4.0, "mixed", rng)
        P = GaussianDistribution(np.zeros(2), A)
        Q = GaussianDistribution(np.zeros(2), B)
        kl = gaussian_kl(P, Q)
        try:
            chi2 = gaussian_chi2(P, Q)
        except Exception:
            continue
        ok = ok and chi2 >= kl - 1e-12 and kl >= 0
    checks.append(_check("chi2-dominates-kl", ok))
    n, eps = 4, 0.5
    p0 = GaussianDistribution(np.zeros(2 * n), 0.5 * np.eye(2 * n))
    p1 = GaussianDistribution(np.zeros(2 * n), 0.5 * (1 + eps / n) * np.eye(2 * n))
    checks.append(
        _check("vacuum-thermal-delta",
               abs(mahalanobis_delta(p1, p0) - eps * math.sqrt(2 / n)) < 1e-12)
    )
    br = wigner_tv_trace_bracket(1, pure=True)
    checks.append(_check("pure-wigner-upper-constant", br["upper_constant"] == 150.0))
    sym = symmetrized_relative_entropy(thermal_state(1.5), thermal_state(1.0))
    checks.append(_check("symmetrized-entropy-thermals", abs(sym - 0.5 * math.log(1.5)) < 1e-12))
    vac16 = vacuum_state(16)
    warm16 = GaussianState(np.zeros(32), 0.5 * (1 + 0.5 / 16) * np.eye(32))
    bracket = trace_distance_bounds(vac16, warm16, budget=6000, rng=rng)
    checks.append(
        _check("vacuum-test-lower", bracket.lower >= 1 - (1 + 0.5 / 32) ** -16 - 1e-9,
               f"{bracket.lower:.4f}")
    )
    return checks


def suite_measurement(rng):
    checks = []
    vac = vacuum_state(1)
    oracle = StateOracle(vac, rng)
    z = oracle.sample_homodyne(HomodyneSetting(phi=0.3, c=100.0), 30000)
    checks.append(
        _check("homodyne-variance", abs(z.var() - 0.51) < 0.02, f"{z.var():.4f}")
    )
    checks.append(_check("ledger", oracle.consumed == 30000))
    mu_phi, s_phi = homodyne_moments(GaussianState([1, 0], 0.5 * np.eye(2)), 0.0)
    checks.append(_check("moments", mu_phi == 1.0 and s_phi == 0.5))
    s = oracle.sample_general_dyne(heterodyne_seed(1), 30000)
    cov = np.cov(s.T)
    checks.append(
        _check("heterodyne-law", np.max(np.abs(cov - np.eye(2))) < 0.05,
               f"max dev {np.max(np.abs(cov - np.eye(2))):.3f}")
    )
    return checks


def suite_ensembles(rng):
    checks = []
    n = 18
    e1 = np.zeros((n, 2))
    e1[0, 0] = e1[1, 1] = 1.0
    e2 = np.zeros((n, 2))
    e2[2, 0] = e2[3, 1] = 1.0
    family = make_overlap_family(n, [e1, e2])
    ens = build_ensemble(EnsembleKind.PASSIVE_C1, family, eps=0.27)
    rep = separation_report(ens)
    checks.append(
        _check("passive-c1-gap", rep["min_distance_lower_bound"] >= 0.27 / 54,
               f"{rep['min_distance_lower_bound']:.5f}")
    )
    ens2 = build_ensemble(EnsembleKind.PURE_C2, family, eps=0.3)
    rep2 = separation_report(ens2)
    checks.append(
        _check("pure-c2-gap", rep2["min_distance_lower_bound"] >= 0.3 / (6 * math.sqrt(5)),
               f"{rep2['min_distance_lower_bound']:.5f}")
    )
    pair = build_ensemble(EnsembleKind.SQUEEZED_PAIR_E1, eps=0.2, a=8.0)
    rep3 = separation_report(pair)
    checks.append(
        _check("squeezed-pair-gap",
               abs(rep3["min_distance_lower_bound"] - (1 - 1.2 ** -0.5)) < 1e-12)
    )
    return checks


def suite_oracle(rng):
    checks = []
    d = fock.cutoff_for_energy(8.0, 1e-9)
    worst = {"entropy": 0.0, "vacuum": 0.0, "fidelity": 0.0, "symrel": 0.0}
    for _ in range(6):
        s1 = GaussianState(np.zeros(2), random_covariance(1, 8.0, "mixed", rng))
        s2 = GaussianState(np.zeros(2), random_covariance(1, 8.0, "mixed", rng))
        m12 = fock.oracle_metrics(s1, s2, d)
        m21 = fock.oracle_metrics(s2, s1, d)
        worst["entropy"] = max(worst["entropy"], abs(m12["entropy"] - von_neumann_entropy(s1.sigma)))
        worst["vacuum"] = max(
            worst["vacuum"],
            abs(fock.fock_density(s1, d).matrix[0, 0].real - fidelity_pure(s1, vacuum_state(1))),
        )
        closed = symmetrized_relative_entropy(s1, s2)
        worst["symrel"] = max(
            worst["symrel"], abs(m12["relative_entropy"] + m21["relative_entropy"] - closed)
        )
        sp = GaussianState(np.zeros(2), random_covariance(1, 8.0, "pure", rng))
        mp = fock.oracle_metrics(sp, s1, d)
        worst["fidelity"] = max(worst["fidelity"], abs(mp["fidelity"] - fidelity_pure(sp, s1)))
    checks.append(_check("oracle-entropy", worst["entropy"] <= 1e-4, f"{worst['entropy']:.2e}"))
    checks.append(_check("oracle-vacuum-prob", worst["vacuum"] <= 1e-8, f"{worst['vacuum']:.2e}"))
    checks.append(_check("oracle-pure-fidelity", worst["fidelity"] <= 1e-5, f"{worst['fidelity']:.2e}"))
    checks.append(
        _check("oracle-symmetrized-entropy", worst["symrel"] <= 1e-3, f"{worst['symrel']:.2e}")
    )
    return checks


SUITES = {
    "symplectic": suite_symplectic,
    "states": suite_states,
    "divergences": suite_divergences,
    "measurement": suite_measurement,
    "ensembles": suite_ensembles,
    "oracle": suite_oracle,
}


def run_suites(names, seed=0):
    """Run the named suites; returns (all_passed, list of check tuples)."""
    import zlib

    results = []
    all_ok = True
    for name in names:
        if name not in SUITES:
            raise KeyError(name)
        rng = np.random.default_rng(np.random.SeedSequence((seed, zlib.crc32(name.encode()))))
        for check_name, ok, detail in SUITES[name](rng):
            results.append((f"{name}:{check_name}", ok, detail))
            all_ok = all_ok and ok
    return all_ok, results
