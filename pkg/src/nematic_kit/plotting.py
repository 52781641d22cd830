"""Figure rendering for the report-producing CLI paths.

Each renderer takes the rows already written to the delimited output and
saves a PNG next to it; figures are a convenience view, the CSV stays the
authoritative artifact.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_ellipticity_scan", "render_ls_scan", "render_diagnostics"]


def render_ellipticity_scan(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    k1 = np.array([r["k1"] for r in rows])
    cmin = np.array([r["c_min"] for r in rows])
    passed = np.array([r["pass"] for r in rows], dtype=bool)
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(k1, cmin, "-", color="0.4", lw=1)
    ax.plot(k1[passed], cmin[passed], "o", color="tab:green", ms=4, label="elliptic")
    if (~passed).any():
        ax.plot(k1[~passed], cmin[~passed], "x", color="tab:red", ms=5, label="lost")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("k1")
    ax.set_ylabel("sampled symbol lower bound")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_ls_scan(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    det = np.array([r["det_modulus"] for r in rows])
    sv = np.array([r["min_sv"] for r in rows])
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.8))
    axes[0].semilogy(np.arange(det.size), np.maximum(det, 1e-300), ".", ms=3)
    axes[0].set_xlabel("test point")
    axes[0].set_ylabel("|det| of boundary matrix")
    axes[1].semilogy(np.arange(sv.size), np.maximum(sv, 1e-300), ".", ms=3, color="tab:orange")
    axes[1].set_xlabel("test point")
    axes[1].set_ylabel("min singular value")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_diagnostics(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    t = np.array([r["t"] for r in rows])
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    panels = (
        ("energy", axes[0, 0], "elastic energy", False),
        ("kinetic", axes[0, 1], "kinetic energy", False),
        ("norm_drift", axes[1, 0], "max | |d|^2 - 1 |", True),
        ("div_u_max", axes[1, 1], "max |div u|", True),
    )
    for key, ax, label, logy in panels:
        vals = np.array([r[key] for r in rows])
        if logy:
            ax.semilogy(t, np.maximum(vals, 1e-18), "-")
        else:
            ax.plot(t, vals, "-")
        ax.set_ylabel(label)
    for ax in axes[1]:
        ax.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
