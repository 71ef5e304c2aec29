#!/usr/bin/env python3
"""One-time calibration of the learning-algorithm constants.

The theory behind each learner fixes only the budget shapes; this script
measures success rates and budget scalings on seeded trials and records the
constants frozen into ``gtl.constants``. Run from the repository root:

    python3 scripts/calibrate.py | tee scripts/calibration.out

Re-running is only needed if an algorithm's internals change; the acceptance
suite pins the frozen values.
"""

import math
import time

import numpy as np

from gtl import constants
from gtl.divergences import trace_distance_bounds, trace_distance_pure
from gtl.errors import LearnError
from gtl.measurement import HomodyneSetting, StateOracle
from gtl.states import GaussianState, squeezed_state
from gtl.symplectic import random_covariance
from gtl.tomography import (
    AlgS1Params,
    adaptive_unsqueeze,
    alg_s1_params,
    heterodyne_baseline_learn,
    learn_pure,
    learn_single_mode_nonadaptive,
)


def banner(title):
    print(f"\n=== {title} ===")


def unsqueeze_contracts():
    banner("adaptive unsqueeze contract (target >= 95% per cell)")
    cells = [(1, 1e4), (1, 256.0), (2, 64.0), (4, 16.0), (8, 16.0)]
    for n, E in cells:
        ok = 0
        trials = 60
        for t in range(trials):
            rng = np.random.default_rng(10_000 + 97 * t)
            if n == 1:
                sigma = 0.5 * np.diag([2 * E * 0.9, 1.0 / (2 * E * 0.9)])
            else:
                sigma = random_covariance(n, E, "pure", rng)
            truth = GaussianState(np.zeros(2 * n), sigma)
            oracle = StateOracle(truth, rng)
            S, diag = adaptive_unsqueeze(oracle, E, 0.05)
            S_inv = np.linalg.inv(S)
            unsq = S_inv @ truth.sigma @ S_inv.T
            ok += np.linalg.norm(np.linalg.inv(unsq), 2) <= 4.0
        print(f"  n={n} E={E:g}: {ok}/{trials} (coeff={constants.UNSQUEEZE_SAMPLE_COEFF}, "
              f"damping={constants.UNSQUEEZE_DAMPING})")


def pure_learner():
    banner("pure-state learner at eps=0.2, E=16 (target >= 85% per cell)")
    budgets = {}
    for n in (2, 4, 8):
        errs = []
        budget = None
        for t in range(30):
            rng = np.random.default_rng(20_000 + 131 * t + n)
            sigma = random_covariance(n, 16.0, "pure", rng)
            truth = GaussianState(rng.normal(scale=0.5, size=2 * n), sigma)
            oracle = StateOracle(truth, rng)
            res = learn_pure(oracle, n, 16.0, 0.2, 1.0 / 3)
            errs.append(trace_distance_pure(res.estimate, truth))
            budget = res.copies_used
        budgets[n] = budget
        rate = np.mean([e <= 0.2 for e in errs])
        print(f"  n={n}: success {rate:.2f}, median err {np.median(errs):.4f}, budget {budget}")
    slope = math.log(budgets[8] / budgets[2]) / math.log(4.0)
    print(f"  budget slope n=2->8: {slope:.3f} (window [1.6, 2.6]; "
          f"coeffs {constants.PURE_HETERODYNE_COEFF}/{constants.PURE_HETERODYNE_LOG_COEFF})")


def alg_s1_operating_point():
    """Population-level evidence for the frozen single-mode constants.

    The frozen operating point trades off three constraints that bind in
    opposite directions at desk scale:
      * per-cell success >= 2/3 needs T >~ 200 shot pairs per angle and a
        low abort rate (angle-count base protects the small-E cells);
      * the E=256 budget must stay small enough that the energy-naive
        heterodyne baseline at the same budget keeps a median error > eps
        (its b-resolution threshold sits near 1.3M copies here);
      * budget shapes are pinned to K = Theta(E), T = Theta(log E / eps^2).
    The measured crossover between the two protocols for this
    implementation sits near E ~ 500; at E = 256 the margins below are
    real but modest, which is why they are recorded at 150/300 trials.
    """
    banner("frozen operating point for the non-adaptive single-mode algorithm")
    eps = 0.15
    print(f"  K = ceil({constants.ALG_S1_ANGLE_COEFF:g} E + {constants.ALG_S1_ANGLE_BASE:g}), "
          f"T = ceil(({constants.ALG_S1_SHOT_COEFF:g} log E + {constants.ALG_S1_SHOT_BASE:g})/eps^2), "
          f"N0 = ceil({constants.ALG_S1_HETERODYNE_COEFF:g}/eps^2)")
    budgets = {}
    for E in (16.0, 64.0, 256.0):
        params = alg_s1_params(E, eps)
        budgets[E] = params.total_copies
        ok = aborts = 0
        trials = 150
        t0 = time.time()
        for t in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence((888_000, int(E), t)))
            truth = squeezed_state(
                a=E / 2, b=1 / (2 * E), theta=rng.uniform(0, np.pi),
                mu=rng.normal(scale=0.4, size=2),
            )
            oracle = StateOracle(truth, rng)
            try:
                res = learn_single_mode_nonadaptive(oracle, params, eps, rng)
            except LearnError:
                aborts += 1
                continue
            bracket = trace_distance_bounds(res.estimate, truth, budget=4000, rng=rng)
            ok += bracket.upper <= eps
        print(f"  E={E:g}: success {ok}/{trials} = {ok / trials:.3f} (aborts {aborts}), "
              f"K={params.K} T={params.T} N={params.total_copies} [{time.time() - t0:.0f}s]")
    print(f"  budget ratio N(256)/N(64) = {budgets[256.0] / budgets[64.0]:.2f} "
          f"(linear-log; quadratic would be ~16)")

    budget = budgets[256.0]
    errors = []
    t0 = time.time()
    for t in range(300):
        rng = np.random.default_rng(np.random.SeedSequence((777_000, t)))
        truth = squeezed_state(a=128.0, b=1 / 512.0, theta=rng.uniform(0, np.pi),
                               mu=rng.normal(scale=0.4, size=2))
        oracle = StateOracle(truth, rng)
        res = heterodyne_baseline_learn(oracle, 1, eps, copies=budget)
        bracket = trace_distance_bounds(res.estimate, truth, budget=4000, rng=rng)
        errors.append(bracket.upper)
    e = np.array(errors)
    print(f"  heterodyne baseline at N(256)={budget}: 300-trial median {np.median(e):.4f} "
          f"(want > {eps}), frac <= eps {np.mean(e <= eps):.3f} [{time.time() - t0:.0f}s]")


def homodyne_concentration():
    banner("homodyne concentration coefficient (target joint rate >= 96%)")
    eps, delta = 0.1, 0.05
    E = 60.0
    truth = squeezed_state(a=E / 2, b=1 / (2 * E), theta=np.pi / 4, mu=(0.3, -0.2))
    angles = (np.pi / 4, np.pi / 4 + 0.35, np.pi / 4 + np.pi / 2)
    for coeff in (24.0, 36.0, 48.0):
        T = math.ceil(coeff * eps**-2 * math.log(1.0 / delta))
        hits = 0
        trials = 1000
        for t in range(trials):
            rng = np.random.default_rng(40_000 + 7 * t)
            phi = angles[t % len(angles)]
            oracle = StateOracle(truth, rng)
            z = oracle.sample_homodyne(HomodyneSetting(phi=phi, c=E), 2 * T)
            mu_hat = z[:T].mean()
            sig_hat = float(np.sum((z[:T] - z[T:]) ** 2) / (2 * T)) - 1.0 / E
            e = np.array([np.cos(phi), np.sin(phi)])
            mu_phi = float(e @ truth.mu)
            sig_phi = float(e @ truth.sigma @ e)
            hits += (abs(mu_hat - mu_phi) <= eps * math.sqrt(sig_phi)
                     and abs(sig_hat - sig_phi) <= eps * sig_phi)
        print(f"  coeff={coeff:g} (T={T}): joint rate {hits / trials:.3f}")


def baseline_contrast():
    banner("heterodyne baseline sanity (near-vacuum truth at N = 400/eps^2)")
    rng = np.random.default_rng(50_000)
    near_vac = GaussianState([0.1, 0.05], 0.55 * np.eye(2))
    res = heterodyne_baseline_learn(StateOracle(near_vac, rng), 1, 0.2, copies=10_000)
    br = trace_distance_bounds(res.estimate, near_vac, budget=9000, rng=rng)
    print(f"  near-vacuum, N={res.copies_used}: upper {br.upper:.3f} (want <= 0.2)")


if __name__ == "__main__":
    print("calibration run; frozen values live in src/gtl/constants.py")
    unsqueeze_contracts()
    pure_learner()
    alg_s1_operating_point()
    homodyne_concentration()
    baseline_contrast()
