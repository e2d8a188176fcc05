"""Rendering of benchmark reports: delimited output plus figures."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import BenchRow, fit_exponent
from .fileformat import format_float

REPORT_COLUMNS = ("method", "states", "alphabet", "seed", "seconds", "max_abs_diff")


def report_tsv(rows: list[BenchRow]) -> str:
    out = ["\t".join(REPORT_COLUMNS)]
    for row in rows:
        out.append("\t".join((row.method, str(row.num_states), str(row.alphabet),
                              str(row.seed), format_float(row.seconds),
                              format_float(row.max_abs_diff))))
    return "\n".join(out) + "\n"


def render_scaling_figure(rows: list[BenchRow], path: str) -> None:
    """Log-log wall time against N, one line per method, fitted slope in the legend."""
    by_method: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        by_method[row.method][row.num_states].append(row.seconds)

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for method, per_size in sorted(by_method.items()):
        sizes = sorted(per_size)
        means = [sum(per_size[n]) / len(per_size[n]) for n in sizes]
        try:
            label = f"{method} (slope {fit_exponent(rows, method):.2f})"
        except ValueError:
            label = method
        ax.plot(sizes, means, marker="o", label=label)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("states N")
    ax.set_ylabel("wall time [s]")
    ax.set_title("Hessian computation scaling")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
