"""Matplotlib rendering of the report data (written next to the CSV/JSON).

Everything here is optional sugar for the CLI `--figure` flags; the delimited
outputs remain the canonical interface.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .degeneracy import all_disks
from .elliptic import LatticeData


def disk_figure(L: LatticeData, path: str) -> None:
    """The four degeneracy regions B_0..B_3 and the branch values e_k."""
    fig, ax = plt.subplots(figsize=(6, 6))
    colors = ["tab:red", "tab:blue", "tab:green", "tab:orange"]
    theta = np.linspace(0.0, 2.0 * math.pi, 361)
    span = math.pi / L.im_tau
    for d, col in zip(all_disks(L), colors):
        if d.kind == "disk":
            ax.plot(
                d.center.real + d.radius * np.cos(theta),
                d.center.imag + d.radius * np.sin(theta),
                color=col,
                label=f"B{d.k}",
            )
            span = max(span, abs(d.center) + d.radius)
        else:
            # half plane boundary Re(alpha*(w - ek)) = 1/2: draw a long chord
            a = d.alpha
            w0 = d.ek + 0.5 / a
            tvec = 1j * a.conjugate() / abs(a)
            ts = np.linspace(-3.0 * span, 3.0 * span, 2)
            ax.plot(
                [(w0 + t * tvec).real for t in ts],
                [(w0 + t * tvec).imag for t in ts],
                color=col,
                linestyle="--",
                label=f"B{d.k} (half plane)",
            )
    for k, ek in enumerate(L.e, start=1):
        ax.plot(ek.real, ek.imag, "k*", markersize=9)
        ax.annotate(f"e{k}", (ek.real, ek.imag), textcoords="offset points", xytext=(5, 5))
    ax.set_xlim(-1.4 * span, 1.4 * span)
    ax.set_ylim(-1.4 * span, 1.4 * span)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"degeneracy regions, tau = {L.tau:.4g}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def phase_figure(samples, path: str) -> None:
    """Scatter of wp(p) colored by the critical point count."""
    fig, ax = plt.subplots(figsize=(6.5, 6))
    xs = np.array([s.wp_p.real for s in samples if s.valid])
    ys = np.array([s.wp_p.imag for s in samples if s.valid])
    cs = np.array([s.count for s in samples if s.valid])
    sc = ax.scatter(xs, ys, c=cs, s=8, cmap="viridis", vmin=4, vmax=10)
    bad = [s for s in samples if not s.valid]
    if bad:
        ax.scatter(
            [s.wp_p.real for s in bad], [s.wp_p.imag for s in bad],
            color="lightgray", s=8, marker="x",
        )
    fig.colorbar(sc, ax=ax, label="critical point count")
    ax.set_aspect("equal")
    ax.set_xlabel("Re wp(p)")
    ax.set_ylabel("Im wp(p)")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def basin_figure(re: np.ndarray, im: np.ndarray, labels: np.ndarray, path: str) -> None:
    """Raster of which attracting fixed point each orbit converges to."""
    fig, ax = plt.subplots(figsize=(6.5, 6))
    n = int(math.isqrt(labels.size))
    img = labels.reshape(n, n)
    ax.imshow(
        img.T,
        origin="lower",
        extent=(re.min(), re.max(), im.min(), im.max()),
        cmap="tab10",
        interpolation="nearest",
        vmin=-1.5,
        vmax=8.5,
    )
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title("attraction basins (label -1 = escaping/undecided)")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def field_figure(u: np.ndarray, path: str) -> None:
    """Heat map of the sampled solution field u over the cell grid."""
    fig, ax = plt.subplots(figsize=(6.5, 6))
    im = ax.imshow(u.T, origin="lower", cmap="magma", interpolation="nearest")
    fig.colorbar(im, ax=ax, label="u")
    ax.set_xlabel("r index")
    ax.set_ylabel("s index")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
