"""Matplotlib figures written straight to files (Agg backend, no display)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def plot_clustering(path, c, title: str = "") -> None:
    labels = c.labels()
    rng = np.random.default_rng(12345)
    colors = rng.uniform(0.25, 0.95, size=(labels.max() + 1, 3))
    colors[0] = 1.0
    fig, ax = plt.subplots(figsize=(max(4, c.grid.cols / 3), max(3, c.grid.rows / 3)))
    ax.imshow(labels, cmap=ListedColormap(colors), origin="lower", interpolation="nearest",
              vmin=0, vmax=labels.max())
    # tile borders
    for r in range(c.grid.rows):
        for col in range(c.grid.cols):
            if col + 1 < c.grid.cols and labels[r, col] != labels[r, col + 1]:
                ax.plot([col + 0.5] * 2, [r - 0.5, r + 0.5], "k", lw=1.2)
            if r + 1 < c.grid.rows and labels[r, col] != labels[r + 1, col]:
                ax.plot([col - 0.5, col + 0.5], [r + 0.5] * 2, "k", lw=1.2)
    ax.set_xlabel("n")
    ax.set_ylabel("m")
    ax.set_title(title or f"Q = {c.Q}")
    _save(fig, path)


def plot_pareto(path, q, gamma) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(q, np.maximum(np.asarray(gamma, float), 1e-16), "o-")
    ax.set_xlabel("Q (clusters)")
    ax.set_ylabel("mask matching index")
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def plot_cuts(path, t, cut_u_db, cut_v_db, mask=None, floor_db: float = -60.0) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
    for ax, cut, name in zip(axes, (cut_u_db, cut_v_db), ("u", "v")):
        ax.plot(t, np.maximum(cut, floor_db))
        if mask is not None:
            other = np.zeros_like(t)
            uu, vv = (t, other + mask.center_v) if name == "u" else (other + mask.center_u, t)
            ax.plot(t, 10 * np.log10(mask(uu, vv)), "r--", lw=1, label="mask")
            ax.legend(loc="lower center")
        ax.set_xlabel(name)
        ax.set_ylim(floor_db, 2)
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("normalised power [dB]")
    _save(fig, path)


def plot_pattern_map(path, p, floor_db: float = -60.0) -> None:
    db = np.where(p.visible, np.maximum(p.db(), floor_db), np.nan)
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(db.T, origin="lower", extent=(p.u[0], p.u[-1], p.v[0], p.v[-1]),
                   vmin=floor_db, vmax=0, cmap="viridis")
    fig.colorbar(im, ax=ax, label="dB")
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    _save(fig, path)


def plot_scan_map(path, scan) -> None:
    th, ph = np.meshgrid(np.radians(scan.phi_deg), scan.theta_deg)
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(5, 4.5))
    sc = ax.scatter(th.ravel(), ph.ravel(), c=scan.sll_db.ravel(), cmap="magma", s=40)
    fig.colorbar(sc, ax=ax, label="SLL [dB]")
    ax.set_title("SLL over scan offsets (radius = theta offset, deg)")
    _save(fig, path)
