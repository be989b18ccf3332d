"""PNG figures for experiment series, rendered off-screen."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.2),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "lines.markersize": 3.5,
    "legend.fontsize": 8,
    "legend.frameon": False,
}
# fixed metadata keeps the PNG bytes reproducible
PNG_METADATA = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=PNG_METADATA)
    plt.close(fig)
    return path


def plot_levels(path, levels, curves, ylabel, logy=True, title=None):
    """One line per entry of ``curves`` (label -> values) against the level n."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, values in curves.items():
            v = np.asarray(values, dtype=float)
            if logy:
                v = np.where(v > 0, v, np.nan)
            ax.plot(levels[:len(v)], v, marker="o", label=label)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("level n")
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend()
        return _save(fig, path)


def plot_lengths(path, states):
    levels = [s.level for s in states]
    alphabet = states[0].alphabet
    curves = {a: [float(s.normalized_lengths[i]) for s in states] for i, a in enumerate(alphabet)}
    return plot_levels(path, levels, curves, "normalized length", logy=False)


def plot_growth(path, norms, rate, label):
    n = np.arange(len(norms))
    return plot_levels(path, n, {"%s (rate %.4f)" % (label, rate): norms}, "norm")
