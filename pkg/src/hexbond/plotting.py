"""Figures for the verification sweeps, written to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.4),
    "savefig.dpi": 150,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_patch_sweep(rows, path, tolerance: float = 1e-8) -> Path:
    """Stress deviation and relative penetration against the penalty scale.

    ``rows`` are dicts with keys ``alpha``, ``stress_deviation`` and
    ``relative_penetration``.
    """
    alphas = [r["alpha"] for r in rows]
    floor = 1e-18
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(alphas, [max(r["stress_deviation"], floor) for r in rows], "o-", label="max stress deviation")
        ax.loglog(alphas, [max(r["relative_penetration"], floor) for r in rows], "s--", label="max |g| / max |u|")
        ax.axhline(tolerance, color="k", lw=0.8, ls=":", label=f"tolerance {tolerance:g}")
        ax.set_xlabel(r"penalty scale $\alpha$ ($\epsilon = \alpha E / h$)")
        ax.set_ylabel("error")
        ax.legend(loc="best")
        return _save(fig, path)


def plot_beam_sweep(rows, reference_tip: float, path) -> Path:
    """Tip deflection of the non-conforming cantilever against the penalty scale."""
    alphas = [r["alpha"] for r in rows]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogx(alphas, [r["tip"] for r in rows], "o-", label="non-conforming")
        ax.axhline(reference_tip, color="k", lw=0.8, ls="--", label="conforming fine reference")
        ax.set_xlabel(r"penalty scale $\alpha$")
        ax.set_ylabel("tip deflection $u_z$")
        ax.legend(loc="best")
        return _save(fig, path)
