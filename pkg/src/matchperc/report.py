"""Matplotlib figures written next to the CLI's CSV/JSON outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .hypgeo import HYPERBOLIC  # noqa: E402


def _xy(z):
    z = complex(z)
    return z.real, z.imag


def _frame(ax, mode):
    ax.set_aspect("equal")
    ax.set_axis_off()
    if mode == HYPERBOLIC:
        ax.add_patch(plt.Circle((0, 0), 1, fill=False, lw=0.8, color="0.4"))


def plot_graph(g, path, m=None, highlight=None, title=None):
    """Straight-segment drawing of g, optional diagonals of G* and a highlighted vertex path."""
    fig, ax = plt.subplots(figsize=(6, 6))
    _frame(ax, g.mode)
    for u, v in g.edges:
        (x0, y0), (x1, y1) = _xy(g.coords[u]), _xy(g.coords[v])
        ax.plot([x0, x1], [y0, y1], color="0.2", lw=0.5)
    if m is not None:
        for x, y, _ in m.diagonals:
            (x0, y0), (x1, y1) = _xy(g.coords[x]), _xy(g.coords[y])
            ax.plot([x0, x1], [y0, y1], color="tab:blue", lw=0.3, alpha=0.5)
    if highlight:
        pts = np.array([_xy(g.coords[v]) for v in highlight])
        ax.plot(pts[:, 0], pts[:, 1], color="tab:red", lw=1.5, marker="o", ms=2)
    ax.plot(*_xy(g.coords[g.root]), "k*", ms=8)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_sweep(result, path):
    """theta_n against p, one line per s value."""
    ps, ss, th = result.grid()
    err = {(c.p, c.s): c.stderr for c in result.cells}
    fig, ax = plt.subplots(figsize=(6, 4))
    for j, s in enumerate(ss):
        e = [err[(p, s)] for p in ps]
        ax.errorbar(ps, th[:, j], yerr=e, marker="o", ms=3, capsize=2, label=f"s = {s:g}")
    ax.set_xlabel("p")
    ax.set_ylabel(r"$\hat\theta_n(p, s)$")
    ax.set_title(f"{result.host}, n = {result.n}, {result.trials} trials")
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_crossing(curves, path, ps=None):
    """Crossing probability R_n(p) per (host, n), with the half level marked."""
    ps = np.linspace(0.0, 1.0, 401) if ps is None else ps
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, curve in curves.items():
        ax.plot(ps, [curve.R(p) for p in ps], label=label)
    ax.axhline(0.5, color="0.5", lw=0.6, ls="--")
    ax.set_xlabel("p")
    ax.set_ylabel("crossing probability")
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_pivotal(inst, g, stats, path):
    """Pivotal frequency of each vertex of the region, drawn at the vertex positions."""
    xy = np.array([_xy(g.coords[v]) for v in inst.base_ids])
    fig, ax = plt.subplots(figsize=(6, 6))
    _frame(ax, g.mode)
    sc = ax.scatter(xy[:, 0], xy[:, 1], c=stats.vertex_freq, s=6, cmap="viridis")
    fig.colorbar(sc, ax=ax, shrink=0.7, label="P(z pivotal)")
    ax.set_title(f"p = {stats.p:g}, s = {stats.s:g}, n = {stats.n}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
