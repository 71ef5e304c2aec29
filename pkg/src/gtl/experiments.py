"""Seeded experiment orchestration and canned demonstrations.

An experiment is a grid over (strategy, n, E, eps, N) cells with a fixed
number of trials per cell. Every trial draws its randomness from
SeedSequence((master_seed, cell_index, trial_index)), so the emitted record
table is a pure function of (config, master seed), independent of the
worker count and of scheduling order.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import constants
from .divergences import (
    tv_monte_carlo,
    trace_distance_bounds,
    trace_distance_pure,
    wigner_distribution,
)
from .ensembles import EnsembleKind, build_ensemble, sample_overlap_family, separation_report
from .errors import DomainError, GtlError, LearnError
from .measurement import StateOracle
from .states import GaussianState, squeezed_state
from .symplectic import random_covariance
from .tomography import (
    alg_s1_params,
    heterodyne_baseline_learn,
    learn_passive_purified,
    learn_pure,
    learn_single_mode_nonadaptive,
    learn_wigner,
)

STRATEGIES = ("alg-s1", "pure", "wigner", "passive", "heterodyne")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment sweep."""

    experiment: str
    strategies: tuple
    n_grid: tuple
    e_grid: tuple
    eps_grid: tuple
    n_copies_grid: tuple = ("auto",)
    trials: int = 10
    seed: int = 0
    out: str = ""
    workers: int = 1
    delta: float = 1.0 / 3
    timing: bool = False
    mc_budget: int = 6000

    def __post_init__(self):
        if not self.strategies:
            raise DomainError("config needs at least one strategy")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise DomainError(f"unknown strategy {s!r}; pick from {STRATEGIES}")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        for grid, name in ((self.n_grid, "n"), (self.e_grid, "E"), (self.eps_grid, "eps")):
            if not grid:
                raise DomainError(f"{name} grid is empty")

    def cells(self):
        """Deterministic cell enumeration: strategy-major, then n, E, eps, N."""
        out = []
        for strategy in self.strategies:
            for n in self.n_grid:
                for E in self.e_grid:
                    for eps in self.eps_grid:
                        for N in self.n_copies_grid:
                            out.append((strategy, int(n), float(E), float(eps), N))
        return out


def _parse_value(raw):
    raw = raw.strip()
    if raw.lower() == "auto":
        return "auto"
    try:
        if any(c in raw for c in ".eE") and not raw.lstrip("+-").isdigit():
            return float(raw)
        return int(raw)
    except ValueError:
        return raw


def parse_config(text):
    """Parse the flat key-value (INI-style, no sections) experiment config."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno} is not 'key = value': {line!r}")
        key, raw = line.split("=", 1)
        values[key.strip().lower()] = raw.strip()

    def grid(key, default=None):
        if key not in values:
            if default is None:
                raise DomainError(f"config is missing required key {key!r}")
            return default
        return tuple(_parse_value(v) for v in values[key].split(",") if v.strip())

    return ExperimentConfig(
        experiment=values.get("experiment", "experiment"),
        strategies=tuple(v.strip() for v in values.get("strategies", "pure").split(",")),
        n_grid=grid("n", (1,)),
        e_grid=grid("e", (8.0,)),
        eps_grid=grid("eps", (0.2,)),
        n_copies_grid=grid("n_copies", ("auto",)),
        trials=int(values.get("trials", "10")),
        seed=int(values.get("seed", "0")),
        out=values.get("out", ""),
        workers=int(values.get("workers", "1")),
        delta=float(values.get("delta", repr(1.0 / 3))),
        timing=values.get("timing", "false").lower() in ("1", "true", "yes"),
        mc_budget=int(values.get("mc_budget", "6000")),
    )


def dump_samples_csv(rows, trial=0):
    lines = ["# schema=1", "trial,copy_index,outcome"]
    for copy_index, coords in rows:
        coord_text = ";".join(repr(c) for c in coords)
        lines.append(f"{trial},{copy_index},{coord_text}")
    return "\n".join(lines) + "\n"


def make_truth(strategy, n, E, rng):
    """Per-strategy ground-truth generator for experiment trials."""
    if strategy == "pure":
        sigma = random_covariance(n, E, "pure", rng)
        return GaussianState(rng.normal(scale=0.5, size=2 * n), sigma)
    if strategy == "wigner":
        sigma = random_covariance(n, E, "mixed", rng)
        return GaussianState(rng.normal(scale=0.4, size=2 * n), sigma)
    if strategy == "passive":
        return GaussianState(np.zeros(2 * n), random_covariance(n, E, "passive", rng))
    if strategy in ("alg-s1", "heterodyne"):
        if n != 1:
            sigma = random_covariance(n, E, "mixed", rng)
            return GaussianState(rng.normal(scale=0.4, size=2 * n), sigma)
        # the hard single-mode family: squeezed to the condition-number promise
        return squeezed_state(
            a=E / 2, b=1 / (2 * E), theta=rng.uniform(0, np.pi),
            mu=rng.normal(scale=0.4, size=2),
        )
    raise DomainError(f"unknown strategy {strategy!r}")


def run_trial(strategy, n, E, eps, n_copies, delta, rng, mc_budget=6000, sample_log=None):
    """Run one learner invocation; returns the record fields.

    With ``sample_log`` set to a list, every measured outcome is appended as
    (copy_index, coordinates) for the --dump-samples CSV.
    """
    truth = make_truth(strategy, n, E, rng)
    oracle = StateOracle(truth, rng)
    if sample_log is not None:
        oracle._recorder = sample_log
    branch = ""
    try:
        if strategy == "alg-s1":
            params = alg_s1_params(E, eps)
            result = learn_single_mode_nonadaptive(oracle, params, eps, rng)
            branch = result.diagnostics.get("branch", "")
        elif strategy == "pure":
            result = learn_pure(oracle, n, E, eps, delta)
        elif strategy == "wigner":
            result = learn_wigner(oracle, n, E, eps, delta)
        elif strategy == "passive":
            result = learn_passive_purified(oracle, n, E, eps, delta, rng)
        elif strategy == "heterodyne":
            copies = None if n_copies == "auto" else int(n_copies)
            result = heterodyne_baseline_learn(oracle, n, eps, copies=copies)
        else:
            raise DomainError(f"unknown strategy {strategy!r}")
    except LearnError as exc:
        return {
            "error": float("nan"),
            "error_metric": "none",
            "success": False,
            "branch": f"failed:{type(exc).__name__}",
            "N": oracle.consumed,
        }

    if strategy == "pure":
        error = trace_distance_pure(result.estimate, truth)
        metric = "trace-distance-pure"
    elif strategy == "wigner":
        mc = tv_monte_carlo(result.estimate, wigner_distribution(truth), max(mc_budget, 2000), rng)
        error = mc["estimate"]
        metric = "wigner-tv-mc"
    else:
        bracket = trace_distance_bounds(result.estimate, truth, budget=mc_budget, rng=rng)
        error = bracket.upper
        metric = "trace-distance-bracket-upper"
    used = result.copies_used
    if used != oracle.consumed:
        raise GtlError("oracle ledger does not match the learner's reported budget")
    return {
        "error": float(error),
        "error_metric": metric,
        "success": bool(error <= eps),
        "branch": branch,
        "N": used,
    }


def _run_task(args):
    (config, cell_index, trial_index) = args
    strategy, n, E, eps, n_copies = config.cells()[cell_index]
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, cell_index, trial_index)))
    t0 = time.perf_counter()
    fields = run_trial(strategy, n, E, eps, n_copies, config.delta, rng, config.mc_budget)
    wall_ms = int(1000 * (time.perf_counter() - t0)) if config.timing else 0
    record = {
        "experiment": config.experiment,
        "strategy": strategy,
        "n": n,
        "E": E,
        "eps": eps,
        "trial": trial_index,
        "seed": config.seed,
        "wall_ms": wall_ms,
    }
    record.update(fields)
    return (cell_index, trial_index, record)


def run_experiment(config):
    """Run all (cell, trial) tasks and return records in deterministic order.

    Per-trial failures (including algorithm aborts) become success=false rows
    and never abort the sweep. With workers > 1 the tasks are distributed
    over processes; the RNG substreams make the output identical to a serial
    run.
    """
    cells = config.cells()
    tasks = [
        (config, ci, ti) for ci in range(len(cells)) for ti in range(config.trials)
    ]
    workers = int(os.environ.get("GTL_WORKERS", config.workers) or 1)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))
    return [rec for _, _, rec in results]


def sqrt_n_separation_row(n, eps, samples, rng):
    """One row of the sqrt(n) separation demo: analytic D_tr lower bound vs Wigner TV."""
    from .divergences import GaussianDistribution

    vac = GaussianDistribution(np.zeros(2 * n), 0.5 * np.eye(2 * n))
    warm = GaussianDistribution(np.zeros(2 * n), 0.5 * (1 + eps / n) * np.eye(2 * n))
    d_lower = 1.0 - (1.0 + eps / (2 * n)) ** -n
    mc = tv_monte_carlo(vac, warm, samples, rng)
    tv = mc["estimate"]
    return {
        "n": n,
        "eps": eps,
        "d_tr_lower": d_lower,
        "wigner_tv_mc": tv,
        "wigner_tv_se": mc["std_error"],
        "ratio": d_lower / tv if tv > 0 else float("inf"),
    }


def demo_sqrt_n_separation(n_list, eps, samples=100_000, seed=0):
    """Vacuum-vs-thermal demo: trace distance beats Wigner TV by ~sqrt(n)/4."""
    if not 0 < eps < 1:
        raise DomainError("eps must be in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD1)))
    return [sqrt_n_separation_row(int(n), eps, samples, rng) for n in n_list]


def demo_ensembles(seed=0, n=18, members=16, eps=0.27):
    """Separation reports for all four hard families at desk scale."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xE5)))
    family = sample_overlap_family(n, members, max_tries=200 * members, rng=rng)
    reports = []
    for kind, kwargs in (
        (EnsembleKind.PASSIVE_C1, {"eps": eps}),
        (EnsembleKind.PURE_C2, {"eps": min(eps, 1.0)}),
        (EnsembleKind.PURE_SCALED_C2_1, {"eps": min(eps, 1.0)}),
        (EnsembleKind.HETERODYNE_HARD_C3, {"eps": min(eps, 1.0), "lam": 16.0}),
    ):
        ens = build_ensemble(kind, family, **kwargs)
        reports.append(separation_report(ens))
    pair = build_ensemble(EnsembleKind.SQUEEZED_PAIR_E1, eps=0.2, a=8.0)
    reports.append(separation_report(pair))
    return reports


def demo_energy_scaling(seed=0, eps=0.15, e_grid=(16.0, 64.0, 256.0), trials=20, workers=1):
    """Desk-scale analogue of the energy-scaling table (Algorithm S1 cells)."""
    config = ExperimentConfig(
        experiment="energy-scaling",
        strategies=("alg-s1",),
        n_grid=(1,),
        e_grid=tuple(e_grid),
        eps_grid=(eps,),
        trials=trials,
        seed=seed,
        workers=workers,
    )
    return run_experiment(config)


def demo_mode_scaling(seed=0, eps=0.2, n_grid=(2, 4, 8), E=16.0, trials=12, workers=1):
    """Desk-scale analogue of the mode-scaling experiment (pure-state learner)."""
    config = ExperimentConfig(
        experiment="mode-scaling",
        strategies=("pure",),
        n_grid=tuple(n_grid),
        e_grid=(E,),
        eps_grid=(eps,),
        trials=trials,
        seed=seed,
        workers=workers,
    )
    return run_experiment(config)
