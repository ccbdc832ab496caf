"""PNG figures written next to the CSV/JSON outputs (non-interactive backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bound(times, x_norm, bound, path, title="solution norm and auxiliary bound"):
    fig, ax = plt.subplots(figsize=(6.4, 4))
    ax.plot(times, x_norm, "k-", lw=1.2, label="||x(t)||")
    ax.plot(times, bound, "r--", lw=1.2, label="||V|| z(t)")
    ax.set_xlabel("t")
    ax.set_yscale("log" if np.all(np.asarray(bound) > 0) else "linear")
    ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def plot_region(boundary, curves, path, title=None):
    """Scanned boundary (solid) against certified ellipse sections (dashed)."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    pts = np.array([[p.x_i, p.x_j] for p in boundary.points] + [[boundary.points[0].x_i,
                                                                   boundary.points[0].x_j]])
    ax.plot(pts[:, 0], pts[:, 1], "k-", lw=1.2, label="scanned boundary")
    for label, curve in curves:
        c = np.vstack([curve.points, curve.points[:1]])
        ax.plot(c[:, 0], c[:, 1], "--", lw=1.2, label=label)
    i, j = boundary.plane
    ax.set_xlabel(f"x{i + 1}")
    ax.set_ylabel(f"x{j + 1}")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(title or f"plane (x{i + 1}, x{j + 1})")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_radius_profile(z_hat, values, path, labels):
    fig, ax = plt.subplots(figsize=(6.4, 4))
    for v, lab in zip(values, labels):
        ax.plot(z_hat, v, lw=1.2, label=lab)
    ax.axhline(0.0, color="grey", lw=0.6)
    ax.set_xlabel("z_hat")
    ax.set_title("radius objective over z_hat")
    ax.legend()
    return _save(fig, path)


def plot_envelopes(times, series, path):
    fig, ax = plt.subplots(figsize=(6.4, 4))
    for lab, v in series.items():
        ax.plot(times, v, lw=1.0, label=lab)
    ax.set_xlabel("t")
    ax.legend()
    return _save(fig, path)
