"""Command-line interface.

Subcommands: validate, learn, distance, ensemble, experiment, demo.
Exit codes: 0 on success, 1 on validation/check failure, 2 on usage errors.
Report paths write CSV and, with --plot, render PNG figures alongside.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import report, validate
from .divergences import (
    GaussianDistribution,
    gaussian_chi2,
    gaussian_kl,
    mahalanobis_delta,
    trace_distance_bounds,
    tv_monte_carlo,
)
from .ensembles import EnsembleKind, build_ensemble, sample_overlap_family, separation_report
from .errors import DomainError, GtlError
from .experiments import (
    ExperimentConfig,
    demo_ensembles,
    demo_energy_scaling,
    demo_mode_scaling,
    demo_sqrt_n_separation,
    dump_samples_csv,
    parse_config,
    run_experiment,
    run_trial,
)
from .serialize import dump_records, load_state_file, RECORD_FIELDS
from .states import GaussianState


def _figdir(args):
    base = args.out or "report.csv"
    return os.path.join(os.path.dirname(os.path.abspath(base)), "figures")


def cmd_validate(args):
    names = list(validate.SUITES) if args.suite == "all" else [args.suite]
    try:
        ok, results = validate.run_suites(names, seed=args.seed)
    except KeyError as exc:
        print(f"unknown suite {exc}", file=sys.stderr)
        return 2
    for name, passed, detail in results:
        status = "pass" if passed else "FAIL"
        suffix = f"  [{detail}]" if detail else ""
        print(f"{status}  {name}{suffix}")
    print(f"{'OK' if ok else 'FAILED'}: {sum(p for _, p, _ in results)}/{len(results)} checks")
    return 0 if ok else 1


def cmd_learn(args):
    rng = np.random.default_rng(np.random.SeedSequence((args.seed, 0x1EA4)))
    sample_log = [] if args.dump_samples else None
    fields = run_trial(
        args.strategy, args.n, args.E, args.eps, args.N, args.delta, rng,
        mc_budget=args.mc_budget, sample_log=sample_log,
    )
    if args.dump_samples:
        with open(args.dump_samples, "w") as fh:
            fh.write(dump_samples_csv(sample_log))
    record = {
        "experiment": "learn",
        "strategy": args.strategy,
        "n": args.n,
        "E": args.E,
        "eps": args.eps,
        "trial": 0,
        "seed": args.seed,
        "wall_ms": 0,
    }
    record.update(fields)
    line = dump_records([record])
    if args.out:
        exists = os.path.exists(args.out)
        with open(args.out, "a") as fh:
            fh.write(line if not exists else line.splitlines()[-1] + "\n")
    print(line, end="")
    return 0


def cmd_distance(args):
    a = load_state_file(args.state_a)
    b = load_state_file(args.state_b)
    rng = np.random.default_rng(np.random.SeedSequence((args.seed, 0xD15)))
    bracket = trace_distance_bounds(a, b, budget=args.budget, rng=rng)
    pa = GaussianDistribution(a.mu, a.sigma)
    pb = GaussianDistribution(b.mu, b.sigma)
    rows = [
        ("trace_distance_lower", bracket.lower, bracket.lower_method),
        ("trace_distance_upper", bracket.upper, bracket.upper_method),
        ("wigner_kl_ab", gaussian_kl(pa, pb), "closed-form"),
        ("wigner_kl_ba", gaussian_kl(pb, pa), "closed-form"),
        ("wigner_delta", mahalanobis_delta(pa, pb), "whitened-deviation"),
    ]
    try:
        rows.append(("wigner_chi2_ab", gaussian_chi2(pa, pb), "closed-form"))
    except (DomainError, GtlError):
        rows.append(("wigner_chi2_ab", float("nan"), "inapplicable (2S2-S1 not PD)"))
    mc = tv_monte_carlo(pa, pb, max(args.budget, 2000), rng)
    rows.append(("wigner_tv_mc", mc["estimate"], f"se={mc['std_error']:.2e}"))
    lines = ["# schema=1", "metric,value,method"]
    for name, value, method in rows:
        lines.append(f"{name},{repr(float(value))},{method}")
        print(f"{name:24s} {value:.6g}   ({method})")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def cmd_ensemble(args):
    rng = np.random.default_rng(np.random.SeedSequence((args.seed, 0xE25)))
    kind = EnsembleKind(args.kind)
    if kind is EnsembleKind.SQUEEZED_PAIR_E1:
        ens = build_ensemble(kind, eps=args.eps, a=args.a, phi=args.phi)
    else:
        family = sample_overlap_family(args.n, args.members, max_tries=500 * args.members, rng=rng)
        ens = build_ensemble(kind, family, eps=args.eps, lam=args.lam)
    rep = separation_report(ens)
    text = report.ensemble_report_to_csv(rep)
    print(
        f"{rep['kind']}: {len(rep['pairs'])} pairs, min distance lower bound "
        f"{rep['min_distance_lower_bound']:.6g}, max {rep['kl_kind']} {rep['max_kl']:.6g}"
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    if args.plot:
        for path in report.ensemble_figure(rep, _figdir(args)):
            print(f"figure: {path}")
    return 0


def cmd_experiment(args):
    if args.config:
        with open(args.config) as fh:
            config = parse_config(fh.read())
    else:
        config = ExperimentConfig(
            experiment="adhoc",
            strategies=tuple(args.strategy.split(",")),
            n_grid=tuple(int(x) for x in args.n_list.split(",")),
            e_grid=tuple(float(x) for x in args.e_list.split(",")),
            eps_grid=(args.eps,),
            trials=args.trials,
            seed=args.seed,
            workers=args.workers,
        )
    if args.out:
        config = replace(config, out=args.out)
    if args.seed_override is not None:
        config = replace(config, seed=args.seed_override)
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    records = run_experiment(config)
    text = dump_records(records)
    out = config.out or args.out
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"wrote {len(records)} records to {out}")
    else:
        print(text, end="")
    if args.plot:
        figdir = os.path.join(os.path.dirname(os.path.abspath(out or "report.csv")), "figures")
        for path in report.experiment_figures(records, figdir, stem=config.experiment):
            print(f"figure: {path}")
    return 0


def cmd_demo(args):
    rng_seed = args.seed
    if args.name == "sqrt-n":
        rows = demo_sqrt_n_separation((1, 4, 16, 64), eps=0.5, samples=args.samples, seed=rng_seed)
        for r in rows:
            print(
                f"n={r['n']:3d}  D_tr lower {r['d_tr_lower']:.4f}  TV(W) {r['wigner_tv_mc']:.4f}"
                f" +- {r['wigner_tv_se']:.1e}  ratio {r['ratio']:.2f}  (sqrt(n)/4 = {0.25 * np.sqrt(r['n']):.2f})"
            )
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(report.sqrt_n_rows_to_csv(rows))
        if args.plot:
            for path in report.sqrt_n_figure(rows, _figdir(args)):
                print(f"figure: {path}")
        return 0
    if args.name == "ensembles":
        reports = demo_ensembles(seed=rng_seed)
        for rep in reports:
            print(
                f"{rep['kind']:22s} pairs {len(rep['pairs']):4d}  min D lower "
                f"{rep['min_distance_lower_bound']:.6g}  max {rep['kl_kind']} {rep['max_kl']:.4g}"
            )
            if args.plot:
                for path in report.ensemble_figure(rep, _figdir(args)):
                    print(f"figure: {path}")
        return 0
    if args.name in ("energy-scaling", "mode-scaling"):
        workers = args.workers or 1
        if args.name == "energy-scaling":
            records = demo_energy_scaling(seed=rng_seed, trials=args.trials, workers=workers)
        else:
            records = demo_mode_scaling(seed=rng_seed, trials=args.trials, workers=workers)
        out = args.out or f"{args.name}.csv"
        with open(out, "w") as fh:
            fh.write(dump_records(records))
        by_cell = {}
        for rec in records:
            key = (rec["strategy"], rec["n"], rec["E"])
            by_cell.setdefault(key, []).append(rec)
        for (strategy, n, E), recs in sorted(by_cell.items()):
            rate = np.mean([r["success"] for r in recs])
            budget = int(np.median([r["N"] for r in recs]))
            print(f"{strategy} n={n} E={E:g}: success {rate:.2f}, median copies {budget}")
        print(f"wrote {len(records)} records to {out}")
        if args.plot:
            figdir = os.path.join(os.path.dirname(os.path.abspath(out)), "figures")
            for path in report.experiment_figures(records, figdir, stem=args.name):
                print(f"figure: {path}")
        return 0
    print(f"unknown demo {args.name!r}", file=sys.stderr)
    return 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gtl",
        description="Gaussian-state tomography lab: simulation, distances, learners, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        p.add_argument("--out", default="", help="output CSV path")
        p.add_argument("--workers", type=int, default=None,
                       help="worker cap (GTL_WORKERS env overrides)")
        p.add_argument("--plot", action="store_true", help="render figures next to the CSV")
        p.add_argument("--config", default="",
                       help="flat key=value file supplying defaults (seed, out, workers)")

    p = sub.add_parser("validate", help="run invariant/oracle self-check suites")
    common(p)
    p.add_argument("--suite", default="all", choices=["all", *validate.SUITES])

    p = sub.add_parser("learn", help="single learner invocation on a generated truth")
    common(p)
    p.add_argument("--strategy", required=True,
                   choices=["alg-s1", "pure", "wigner", "passive", "heterodyne"])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--E", type=float, default=8.0)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=1.0 / 3)
    p.add_argument("--N", default="auto", help="explicit copy budget (heterodyne strategy)")
    p.add_argument("--mc-budget", type=int, default=6000)
    p.add_argument("--dump-samples", default="",
                   help="write every measured outcome (trial, copy index, coordinates) to this CSV")

    p = sub.add_parser("distance", help="pairwise metrics between two serialized states")
    common(p)
    p.add_argument("--state-a", required=True)
    p.add_argument("--state-b", required=True)
    p.add_argument("--budget", type=int, default=20000, help="Monte-Carlo sample budget")

    p = sub.add_parser("ensemble", help="build a hard ensemble and report separations")
    common(p)
    p.add_argument("--kind", required=True, choices=[k.value for k in EnsembleKind])
    p.add_argument("--n", type=int, default=18)
    p.add_argument("--members", type=int, default=16)
    p.add_argument("--eps", type=float, default=0.27)
    p.add_argument("--lambda", dest="lam", type=float, default=16.0)
    p.add_argument("--a", type=float, default=8.0)
    p.add_argument("--phi", type=float, default=0.0)

    p = sub.add_parser("experiment", help="run a seeded experiment sweep")
    common(p)
    p.add_argument("--strategy", default="pure")
    p.add_argument("--n-list", default="2")
    p.add_argument("--e-list", default="8")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed-override", type=int, default=None,
                   help="override the config file's master seed")

    p = sub.add_parser("demo", help="canned demonstrations")
    common(p)
    p.add_argument("--name", required=True,
                   choices=["sqrt-n", "ensembles", "energy-scaling", "mode-scaling"])
    p.add_argument("--samples", type=int, default=200000)
    p.add_argument("--trials", type=int, default=12)

    return parser


COMMANDS = {
    "validate": cmd_validate,
    "learn": cmd_learn,
    "distance": cmd_distance,
    "ensemble": cmd_ensemble,
    "experiment": cmd_experiment,
    "demo": cmd_demo,
}


def _apply_config_defaults(args):
    """Fill seed/out/workers from --config where the flags were left unset."""
    if getattr(args, "config", ""):
        if args.command != "experiment":
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
            if args.seed is None:
                args.seed = cfg.seed
            if not args.out:
                args.out = cfg.out
            if args.workers is None and cfg.workers:
                args.workers = cfg.workers
    if getattr(args, "seed", None) is None:
        args.seed = 0
    return args


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0
    try:
        args = _apply_config_defaults(args)
        return COMMANDS[args.command](args)
    except (DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GtlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
