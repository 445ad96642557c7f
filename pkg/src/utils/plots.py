"""SVG charts for evaluation reports: histograms, region heatmaps, preset bar charts."""

import logging
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

HISTOGRAM_BINS = 20


def histogram_counts(values: Sequence[float], bins: int = HISTOGRAM_BINS) -> tuple[np.ndarray, np.ndarray]:
    """Bin counts and edges over [0, 1]; values outside are clipped onto the range."""
    data = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    return np.histogram(data, bins=bins, range=(0.0, 1.0))


def _save(fig: plt.Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    logger.debug(f"Wrote {path}")
    return path


def plot_histogram(
    series: Mapping[str, Sequence[float]],
    title: str,
    xlabel: str,
    path: str | Path,
    bins: int = HISTOGRAM_BINS,
) -> Path:
    """One step histogram per labelled series, sharing the [0, 1] bins."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, values in series.items():
        counts, edges = histogram_counts(values, bins)
        ax.stairs(counts, edges, label=f"{label} (n={int(counts.sum())})")
    ax.set_xlim(0.0, 1.0)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    if series:
        ax.legend()
    return _save(fig, Path(path))


def plot_heatmap(counts: np.ndarray, title: str, path: str | Path) -> Path:
    """Tick counts per region; row 0 is the north edge of the level."""
    fig, ax = plt.subplots(figsize=(5, 5))
    image = ax.imshow(counts, cmap="viridis", origin="upper", interpolation="nearest")
    rows, cols = counts.shape
    ax.set_xticks(range(cols))
    ax.set_yticks(range(rows))
    ax.set_xlabel("column (x)")
    ax.set_ylabel("row (z)")
    ax.set_title(title)
    fig.colorbar(image, ax=ax, label="ticks")
    return _save(fig, Path(path))


def plot_preset_bars(
    averages: Mapping[str, Mapping[str, float]],
    title: str,
    ylabel: str,
    path: str | Path,
) -> Path:
    """
    Grouped bars: one group per config, one bar per preset.

    Args:
        averages: config -> preset -> value
        title: Chart title
        ylabel: Axis label
        path: Output SVG file
    """
    configs = list(averages)
    presets = sorted({p for values in averages.values() for p in values})
    width = 0.8 / max(len(presets), 1)
    x = np.arange(len(configs))

    fig, ax = plt.subplots(figsize=(8, 4))
    for offset, preset in enumerate(presets):
        heights = [averages[c].get(preset, 0.0) for c in configs]
        ax.bar(x + offset * width - 0.4 + width / 2, heights, width, label=f"preset {preset}")
    ax.set_xticks(x)
    ax.set_xticklabels(configs, rotation=20)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if presets:
        ax.legend()
    return _save(fig, Path(path))
