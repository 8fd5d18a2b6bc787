"""Figures for sweep reports. matplotlib is imported lazily, with the Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def plot_sweep(rows: Sequence[dict], path: str | Path) -> Path:
    """Per-regularizer mean error against d, with the 1/4 floor drawn in."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fig, (ax_mean, ax_fam) = plt.subplots(1, 2, figsize=(9, 3.6))
    by_reg: dict[str, list[dict]] = {}
    for row in rows:
        by_reg.setdefault(row["regularizer"], []).append(row)
    for name, group in by_reg.items():
        group = sorted(group, key=lambda r: r["d"])
        ax_mean.plot([r["d"] for r in group], [float(r["mean_float"]) for r in group], marker="o", label=name)
    ax_mean.axhline(0.25, color="k", ls="--", lw=0.8)
    ax_mean.set_xlabel("d")
    ax_mean.set_ylabel("mean error at x_test")
    ax_mean.set_ylim(0, 1.02)
    ax_mean.legend(fontsize=7)

    # family split at the largest d in the sweep
    dmax = max(r["d"] for r in rows)
    last = [r for r in rows if r["d"] == dmax]
    width = 0.8 / max(len(last), 1)
    for j, r in enumerate(last):
        xs = [i + j * width for i in range(4)]
        ax_fam.bar(xs, [float(r[f"T{i}"]) for i in range(1, 5)], width=width, label=r["regularizer"])
    ax_fam.set_xticks([i + 0.4 - width / 2 for i in range(4)])
    ax_fam.set_xticklabels(["T1", "T2", "T3", "T4"])
    ax_fam.set_title(f"E[T_i] at d = {dmax}", fontsize=9)
    ax_fam.set_ylim(0, 1.02)

    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
