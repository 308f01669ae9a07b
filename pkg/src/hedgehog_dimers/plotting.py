"""Matplotlib figures written as byte-reproducible SVG plus PNG."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402

from .lattice import SQRT2, Domain, is_black  # noqa: E402

plt.rcParams["svg.hashsalt"] = "hedgehog-dimers"
plt.rcParams["svg.fonttype"] = "path"


def _xy(c, delta):
    s = delta / SQRT2
    return c[0] * s, c[1] * s


def _rotated(c, delta):
    # lattice squares are tilted by 45 degrees
    x, y = _xy(c, delta)
    r = delta / SQRT2
    return [(x + r, y), (x, y + r), (x - r, y), (x, y - r)]


def _domino(u, v, delta):
    # the two tilted squares share one side; drop its endpoints and order the rest
    pu, pv = _rotated(u, delta), _rotated(v, delta)
    shared = [p for p in pu if any(np.allclose(p, q) for q in pv)]
    pts = np.array([p for p in pu + pv if not any(np.allclose(p, q) for q in shared)])
    c = pts.mean(axis=0)
    return pts[np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))]


def save(fig, path_stem) -> list:
    """Write <stem>.svg and <stem>.png; returns the written paths."""
    stem = Path(path_stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    out = []
    svg = stem.with_suffix(".svg")
    fig.savefig(svg, format="svg", metadata={"Date": None, "Creator": None})
    out.append(svg)
    png = stem.with_suffix(".png")
    fig.savefig(png, format="png", dpi=100, metadata={"Software": None})
    out.append(png)
    plt.close(fig)
    return out


def plot_domain(d: Domain, ax=None):
    fig = None
    if ax is None:
        fig, ax = plt.subplots(figsize=(5, 5))
    polys, cols = [], []
    for c in sorted(d.squares):
        polys.append(_rotated(c, d.delta))
        cols.append("0.25" if is_black(c) else "0.92")
    ax.add_collection(PolyCollection(polys, facecolors=cols, edgecolors="0.5", linewidths=0.2))
    bad = getattr(d, "irregular_blocks", ())
    if bad:
        pts = np.array([_xy(b, d.delta) for b, _ in bad])
        ax.plot(pts[:, 0], pts[:, 1], "x", color="tab:red", ms=4, label="irregular block")
        ax.legend(loc="upper right", fontsize=7)
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_axis_off()
    return fig


def plot_tiling(t, ax=None):
    d = t.domain
    fig = None
    if ax is None:
        fig, ax = plt.subplots(figsize=(5, 5))
    polys, cols = [], []
    for u, v in sorted(t.matching.items()):
        polys.append(_domino(u, v, d.delta))
        dn, dm = v[0] - u[0], v[1] - u[1]
        cols.append({(1, 1): "tab:blue", (-1, -1): "tab:orange",
                     (-1, 1): "tab:green", (1, -1): "tab:red"}[(dn, dm)])
    ax.add_collection(PolyCollection(polys, facecolors=cols, edgecolors="k", linewidths=0.3))
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_axis_off()
    return fig


def plot_scalar(points: dict, delta: float, title: str = "", ax=None, cmap="viridis"):
    """Scatter plot of a real function on lattice points."""
    fig = None
    if ax is None:
        fig, ax = plt.subplots(figsize=(5.5, 5))
    keys = sorted(points)
    xy = np.array([_xy(k, delta) for k in keys])
    val = np.array([points[k] for k in keys], dtype=float)
    sc = ax.scatter(xy[:, 0], xy[:, 1], c=val, s=6, cmap=cmap, marker="s", linewidths=0)
    (fig or ax.figure).colorbar(sc, ax=ax, shrink=0.8)
    ax.set_aspect("equal")
    ax.set_title(title, fontsize=9)
    ax.set_axis_off()
    return fig


def plot_errors(rows, title: str = "", key: str = "error", ax=None):
    fig = None
    if ax is None:
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
    x = np.array([r["delta"] for r in rows])
    y = np.array([r[key] for r in rows])
    ax.loglog(x, y, "o-", color="tab:blue")
    ax.set_xlabel("mesh size")
    ax.set_ylabel(key)
    ax.set_title(title, fontsize=9)
    ax.invert_xaxis()
    ax.grid(True, which="both", lw=0.3)
    if fig is not None:
        fig.tight_layout()
    return fig
