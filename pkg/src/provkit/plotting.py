"""Matplotlib figures written next to the CSV/JSON outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from provkit.evaluation import ConfusionMatrix  # noqa: E402
from provkit.render import BLOCK  # noqa: E402

DEFAULT_COLORS = ("#4a90d9", "#f5a623", "#2e9d3a")


def _runs(line: str):
    start = None
    for i, ch in enumerate(line + "-"):
        if ch == BLOCK and start is None:
            start = i
        elif ch != BLOCK and start is not None:
            yield start, i - start
            start = None


def plot_block_diagram(
    rows: Sequence[tuple[str, str]],
    path: str | Path,
    title: str = "",
    colors: Sequence[str] = DEFAULT_COLORS,
) -> Path:
    """One horizontal track per row: grey dashes for words, coloured blocks for covered words.

    Consecutive row pairs share a colour, matching the two-lines-per-pair
    layout of :func:`provkit.render.render_block_diagram`.
    """
    path = Path(path)
    width = max((len(line) for _, line in rows), default=1)
    fig, ax = plt.subplots(figsize=(min(4 + width / 40, 24), 0.45 * len(rows) + 1.2))
    for k, (label, line) in enumerate(rows):
        y = len(rows) - 1 - k
        color = colors[(k // 2) % len(colors)]
        ax.hlines([y] * len(line), [i + 0.15 for i in range(len(line))], [i + 0.85 for i in range(len(line))],
                  color="#999999", linewidth=1)
        for start, n in _runs(line):
            ax.add_patch(Rectangle((start, y - 0.3), n, 0.6, color=color, linewidth=0))
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels([label for label, _ in reversed(rows)], fontsize=8)
    ax.set_xlim(0, width)
    ax.set_ylim(-0.7, len(rows) - 0.3)
    ax.set_xlabel("word position")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_confusion_matrices(
    per_category: Mapping[str, ConfusionMatrix],
    path: str | Path,
    labels: tuple[str, str] = ("ChatGPT", "Other"),
) -> Path:
    path = Path(path)
    cats = list(per_category)
    fig, axes = plt.subplots(1, len(cats), figsize=(2.6 * len(cats) + 0.5, 2.8), squeeze=False)
    for ax, cat in zip(axes[0], cats):
        cm = per_category[cat]
        grid = [[cm.tp, cm.fn], [cm.fp, cm.tn]]
        ax.imshow(grid, cmap="Blues")
        top = max(max(r) for r in grid) or 1
        for i in range(2):
            for j in range(2):
                ax.text(j, i, str(grid[i][j]), ha="center", va="center",
                        color="white" if grid[i][j] > top / 2 else "black")
        ax.set_xticks([0, 1], labels)
        ax.set_yticks([0, 1], labels)
        ax.set_xlabel("predicted")
        ax.set_title(cat)
    axes[0][0].set_ylabel("actual")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
