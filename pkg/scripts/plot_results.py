"""Example plots for harness CSV output (documentation only, not tested).

    python scripts/plot_results.py artifacts/density_grid.csv --kind grid
    python scripts/plot_results.py artifacts/bdmc_curve.csv --kind bdmc
    python scripts/plot_results.py artifacts/table1.summary.csv --kind summary
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from core_experiments.models.result_row import GridRow, ResultRow, SummaryRow  # noqa: E402
from core_experiments.utils.result_io import read_rows  # noqa: E402


def plot_grid(path: Path) -> None:
    rows = read_rows(path, GridRow)
    by_q: dict[float, dict[float, list[GridRow]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        by_q[row.q][row.beta].append(row)

    fig, axes = plt.subplots(1, len(by_q), figsize=(4 * len(by_q), 5), sharey=True, squeeze=False)
    for ax, (q, by_beta) in zip(axes[0], sorted(by_q.items()), strict=True):
        for offset, (beta, cells) in enumerate(sorted(by_beta.items())):
            z = np.array([c.z for c in cells])
            density = np.exp([c.log_density for c in cells])
            peak = density.max() if density.max() > 0 else 1.0
            ax.fill_between(z, offset, offset + 0.9 * density / peak, alpha=0.6)
        ax.set_title(f"q = {q:g}")
        ax.set_xlabel("z")
    axes[0][0].set_ylabel("beta index")
    plt.tight_layout()
    plt.show()
    plt.close(fig)


def plot_bdmc(path: Path) -> None:
    rows = [row for row in read_rows(path, ResultRow) if row.log_upper is not None]
    cells: dict[float, dict[int, list[ResultRow]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        cells[row.q][row.T].append(row)

    fig, ax = plt.subplots(figsize=(10, 6))
    for q, by_t in sorted(cells.items()):
        ts = sorted(by_t)
        lower = [np.mean([r.log_lower for r in by_t[t]]) for t in ts]
        upper = [np.mean([r.log_upper for r in by_t[t]]) for t in ts]
        (line,) = ax.plot(ts, lower, marker="o", label=f"q = {q:g}")
        ax.plot(ts, upper, marker="o", linestyle="--", color=line.get_color())
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("log Z_T / Z_0 bounds")
    plt.legend()
    plt.tight_layout()
    plt.show()
    plt.close(fig)


def plot_summary(path: Path) -> None:
    rows = read_rows(path, SummaryRow)
    fig, ax = plt.subplots(figsize=(10, 6))
    qs = [row.q for row in rows]
    ax.errorbar(qs, [row.mean for row in rows], yerr=[row.std or 0.0 for row in rows], fmt="o", capsize=4)
    ax.axhline(1.0, color="black", linewidth=0.8)
    ax.set_xlabel("q")
    ax.set_ylabel("Z estimate (mean +/- std over seeds)")
    plt.tight_layout()
    plt.show()
    plt.close(fig)


PLOTS = {"grid": plot_grid, "bdmc": plot_bdmc, "summary": plot_summary}


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Plot qpaths harness CSV output.")
    parser.add_argument("csv", type=Path)
    parser.add_argument("--kind", choices=sorted(PLOTS), required=True)
    return parser.parse_args()


if __name__ == "__main__":
    args = parse_args()
    PLOTS[args.kind](args.csv)
