"""Log-log decay chart rendered to a deterministic SVG.

The figure is built on an explicit canvas (no pyplot state) and saved with a
fixed hash salt and no timestamp metadata, so repeated runs on the same data
produce byte-identical files.
"""

from __future__ import annotations

import numpy as np
from matplotlib import rc_context
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

_COLORS = {"sup": "#1f77b4", "wsup": "#d62728", "l2": "#2ca02c"}
_HASHSALT = "specband"


def decay_plot(
    path: str,
    times,
    norms: dict,
    fits: dict | None = None,
    predictions: dict | None = None,
    title: str | None = None,
) -> None:
    """Draw norm(t) per kind with its fitted power law and a guide line at
    the predicted slope, all on log-log axes, and write an SVG to path."""
    times = np.asarray(times, dtype=float)
    fits = fits or {}
    predictions = predictions or {}

    fig = Figure(figsize=(7.0, 5.0))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot()

    for kind, values in norms.items():
        color = _COLORS.get(kind, "#7f7f7f")
        ax.loglog(times, values, "o", markersize=3.5, color=color, label=kind)
        fit = fits.get(kind)
        if fit is not None:
            span = times[times >= fit.t_min]
            if span.size >= 2:
                line = np.exp(fit.intercept) * span**fit.slope
                ax.loglog(
                    span, line, "-", linewidth=1.2, color=color,
                    label=f"{kind} fit: slope {fit.slope:+.3f}",
                )
            predicted = predictions.get(kind)
            if predicted is not None:
                anchor = np.exp(fit.intercept) * fit.t_min**fit.slope
                guide = anchor * (span / fit.t_min) ** predicted
                ax.loglog(
                    span, guide, ":", linewidth=1.0, color=color, alpha=0.7,
                    label=f"{kind} guide: slope {predicted:+.3f}",
                )

    ax.set_xlabel("t")
    ax.set_ylabel("norm of evolved state")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(fontsize=8, loc="lower left")
    fig.tight_layout()
    with rc_context({"svg.hashsalt": _HASHSALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
