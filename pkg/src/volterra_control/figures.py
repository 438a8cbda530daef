"""Matplotlib renderings that accompany the CLI's CSV output.

Each function draws one figure for a finished analysis and saves it as a
PNG next to the delimited data, returning the file name.  The Agg backend
keeps everything headless; nothing here feeds back into verdicts.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

__all__ = [
    "measure_figure",
    "resolvent_figure",
    "scaling_figure",
    "trajectory_figure",
]

_DPI = 120


def _save(fig, out_dir: str, name: str) -> str:
    # temp + rename, matching the CLI's atomic-write policy
    path = os.path.join(out_dir, name)
    tmp = os.path.join(out_dir, f".tmp-{name}")
    fig.savefig(tmp, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    os.replace(tmp, path)
    return name


def measure_figure(
    positions,
    masses,
    out_dir: str,
    name: str,
    witness_center: float | None = None,
    witness_side: float | None = None,
    title: str = "spectral measure",
) -> str:
    """Atom scatter in the right half-plane, optional worst Carleson square."""
    positions = np.asarray(positions, dtype=complex)
    masses = np.asarray(masses, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if positions.size:
        peak = float(masses.max())
        sizes = 12.0 + 108.0 * masses / peak if peak > 0 else 20.0
        ax.scatter(positions.real, positions.imag, s=sizes, alpha=0.7, zorder=3)
        if positions.real.max() / max(positions.real.min(), 1e-300) > 1e3:
            ax.set_xscale("log")
    if witness_side is not None and witness_center is not None:
        ax.add_patch(
            Rectangle(
                (0.0, witness_center - 0.5 * witness_side),
                witness_side,
                witness_side,
                fill=False,
                edgecolor="tab:red",
                linewidth=1.2,
                zorder=2,
                label="worst square",
            )
        )
        ax.legend(loc="best")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, out_dir, name)


def trajectory_figure(t, state_norm, out_dir: str, name: str) -> str:
    """State norm over time for a simulation run."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(t, state_norm, lw=1.4)
    ax.set_xlabel("t")
    ax.set_ylabel("state norm")
    ax.set_title("trajectory")
    ax.grid(True, alpha=0.3)
    return _save(fig, out_dir, name)


def resolvent_figure(t, values, residual, out_dir: str, name: str) -> str:
    """Scalar resolvent curve with its pointwise equation residual."""
    values = np.asarray(values, dtype=complex)
    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(6.0, 5.5), sharex=True, height_ratios=[2, 1]
    )
    ax1.plot(t, values.real, lw=1.4, label="Re c")
    if np.any(values.imag != 0.0):
        ax1.plot(t, values.imag, lw=1.2, ls="--", label="Im c")
    ax1.set_ylabel("c(t)")
    ax1.legend(loc="best")
    ax1.grid(True, alpha=0.3)
    positive = np.asarray(residual, dtype=float) > 0.0
    if np.any(positive):
        ax2.semilogy(np.asarray(t)[positive], np.asarray(residual)[positive], lw=1.0)
    ax2.set_xlabel("t")
    ax2.set_ylabel("residual")
    ax2.grid(True, alpha=0.3)
    return _save(fig, out_dir, name)


def scaling_figure(
    h,
    ratios,
    measured_slope: float,
    predicted_slope: float,
    out_dir: str,
    name: str,
) -> str:
    """Log-log Carleson mass ratios with the fitted and predicted slopes."""
    h = np.asarray(h, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(h, ratios, "o", ms=4, label="measured")
    if h.size >= 2 and np.all(ratios > 0.0):
        anchor = math.log(ratios[0])
        fit = [math.exp(anchor + measured_slope * math.log(x / h[0])) for x in h]
        ax.loglog(h, fit, "-", lw=1.2, label=f"fit slope {measured_slope:.3f}")
        pred = [math.exp(anchor + predicted_slope * math.log(x / h[0])) for x in h]
        ax.loglog(h, pred, "--", lw=1.2, label=f"predicted {predicted_slope:.3f}")
    ax.set_xlabel("square side h")
    ax.set_ylabel("mass(Q_h)^beta / h")
    ax.set_title("Carleson scaling")
    ax.legend(loc="best")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, out_dir, name)
