"""Report rendering: delimited outputs plus matplotlib figures.

Every CLI report path writes its CSV first and can additionally render
figures (PNG) next to it. Figures are presentation sugar; the CSV is the
contract and stays byte-deterministic.
"""

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .serialize import dump_records


def _ensure_dir(path):
    if path:
        os.makedirs(path, exist_ok=True)


def write_records(path, records):
    with open(path, "w") as fh:
        fh.write(dump_records(records))


def experiment_figures(records, figdir, stem="experiment"):
    """Standard experiment figures: error distributions and budget scaling."""
    _ensure_dir(figdir)
    paths = []
    by_cell = defaultdict(list)
    for rec in records:
        by_cell[(rec["strategy"], rec["n"], rec["E"], rec["eps"])].append(rec)

    # median error and success rate vs E (per strategy/n/eps)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    series = defaultdict(list)
    for (strategy, n, E, eps), recs in sorted(by_cell.items()):
        errors = [r["error"] for r in recs if np.isfinite(r["error"])]
        rate = float(np.mean([r["success"] for r in recs]))
        med = float(np.median(errors)) if errors else float("nan")
        series[(strategy, n, eps)].append((E, med, rate))
    for (strategy, n, eps), pts in sorted(series.items()):
        pts.sort()
        es = [p[0] for p in pts]
        ax1.loglog(es, [p[1] for p in pts], "o-", label=f"{strategy} n={n}")
        ax2.semilogx(es, [p[2] for p in pts], "s-", label=f"{strategy} n={n}")
    ax1.set_xlabel("E")
    ax1.set_ylabel("median error")
    ax2.set_xlabel("E")
    ax2.set_ylabel("success rate")
    ax2.set_ylim(0, 1.05)
    ax1.legend(fontsize=7)
    fig.tight_layout()
    path = os.path.join(figdir, f"{stem}_error.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)

    # consumed copies vs n (budget scaling)
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    budget = defaultdict(list)
    for (strategy, n, E, eps), recs in sorted(by_cell.items()):
        budget[(strategy, E, eps)].append((n, float(np.median([r["N"] for r in recs]))))
    for (strategy, E, eps), pts in sorted(budget.items()):
        pts.sort()
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-",
                  label=f"{strategy} E={E:g}")
    ax.set_xlabel("modes n")
    ax.set_ylabel("median copies used")
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = os.path.join(figdir, f"{stem}_budget.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)
    return paths


def sqrt_n_rows_to_csv(rows):
    lines = ["# schema=1", "n,eps,d_tr_lower,wigner_tv_mc,wigner_tv_se,ratio"]
    for r in rows:
        lines.append(
            ",".join(
                repr(float(r[k])) if k != "n" else str(r[k])
                for k in ("n", "eps", "d_tr_lower", "wigner_tv_mc", "wigner_tv_se", "ratio")
            )
        )
    return "\n".join(lines) + "\n"


def sqrt_n_figure(rows, figdir, stem="sqrt_n_separation"):
    _ensure_dir(figdir)
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    ax.loglog(ns, [r["ratio"] for r in rows], "o-", label="measured ratio")
    ax.loglog(ns, [0.25 * np.sqrt(n) for n in ns], "--", label="sqrt(n)/4")
    ax.set_xlabel("modes n")
    ax.set_ylabel("trace distance / Wigner TV")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(figdir, f"{stem}.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]


def ensemble_report_to_csv(report):
    lines = ["# schema=1", "pair,d_lower,kl,overlap"]
    for row in report["pairs"]:
        a, b = row["pair"]
        lines.append(
            f"{a}-{b},{repr(float(row['d_lower']))},{repr(float(row['kl']))},"
            f"{repr(float(row['overlap_sq']))}"
        )
    return "\n".join(lines) + "\n"


def ensemble_figure(report, figdir, stem=None):
    _ensure_dir(figdir)
    stem = stem or f"ensemble_{report['kind']}"
    lows = [row["d_lower"] for row in report["pairs"]]
    kls = [row["kl"] for row in report["pairs"]]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
    ax1.hist(lows, bins=min(24, max(4, len(lows) // 4)), color="#447")
    ax1.set_xlabel("pairwise trace-distance lower bound")
    ax1.set_ylabel("pairs")
    ax2.hist(kls, bins=min(24, max(4, len(kls) // 4)), color="#747")
    ax2.set_xlabel(report["kl_kind"])
    fig.suptitle(report["kind"], fontsize=10)
    fig.tight_layout()
    path = os.path.join(figdir, f"{stem}.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]
