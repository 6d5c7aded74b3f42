"""Scatter-plot figures for the evaluation report.

One 2x2 figure per level (rows: orientation group, columns: lumen/wall),
written as PNG next to the CSV output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .evaluate import (AXES_PARALLEL, LUMEN, ORIGINAL, PER_ANNOTATION,
                       PER_IMAGE_AGGREGATE, WALL, CorrelationReport)

_LEVEL_TITLES = {
    PER_ANNOTATION: "Individual worker measurements",
    PER_IMAGE_AGGREGATE: "Aggregated (median) measurements",
}
_ORIENTATION_TITLES = {
    ORIGINAL: "original orientation",
    AXES_PARALLEL: "axes-parallel orientations",
}


def render_scatter_figures(reports: list[CorrelationReport], out_dir) -> list[Path]:
    """Render one figure per level; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_group = {(r.orientation_group, r.quantity, r.level): r for r in reports}
    written = []

    for level in (PER_ANNOTATION, PER_IMAGE_AGGREGATE):
        fig, axes = plt.subplots(2, 2, figsize=(9, 8))
        for row, orientation in enumerate((ORIGINAL, AXES_PARALLEL)):
            for col, quantity in enumerate((LUMEN, WALL)):
                ax = axes[row][col]
                rep = by_group.get((orientation, quantity, level))
                if rep is not None and rep.n > 0:
                    xs = [p[0] for p in rep.scatter]
                    ys = [p[1] for p in rep.scatter]
                    ax.scatter(xs, ys, s=12, alpha=0.6)
                    r_text = "undefined" if rep.r is None else f"{rep.r:.3f}"
                    ax.set_title(
                        f"{quantity}, {_ORIENTATION_TITLES[orientation]}\n"
                        f"n = {rep.n}, r = {r_text}", fontsize=10)
                else:
                    ax.set_title(
                        f"{quantity}, {_ORIENTATION_TITLES[orientation]}\n"
                        "no data", fontsize=10)
                ax.set_xlabel("expert area")
                ax.set_ylabel("worker area")
        fig.suptitle(_LEVEL_TITLES[level])
        fig.tight_layout(rect=(0, 0, 1, 0.96))
        path = out_dir / f"scatter_{level}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
