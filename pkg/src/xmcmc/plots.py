"""Figure rendering for experiment outputs.

All functions take already-aggregated rows (the same data the CSV
writers receive) and render PNG files next to the delimited output.
matplotlib runs on the Agg backend so no display is needed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _group_by_detector(rows):
    groups: dict[str, list] = {}
    for row in rows:
        groups.setdefault(str(row[0]), []).append(row)
    return groups


def plot_ber(path: str, rows) -> None:
    """Semilog BER vs Eb/N0, one line per detector.

    rows: (detector, ebn0_db, realizations, bits, bit_errors, ber).
    Zero-error points are dropped from the log plot.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for name, group in sorted(_group_by_detector(rows).items()):
        pts = sorted((float(r[1]), float(r[5])) for r in group)
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        keep = y > 0
        ax.semilogy(x[keep], y[keep], marker="o", label=name)
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_convergence(path: str, rows) -> None:
    """BER vs Gibbs iteration count, one line per detector per Eb/N0.

    rows: (detector, ebn0_db, n_iter, realizations, bits, bit_errors, ber).
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    groups: dict[str, list] = {}
    for row in rows:
        label = f"{row[0]} @ {float(row[1]):g} dB"
        groups.setdefault(label, []).append(row)
    for name, group in sorted(groups.items()):
        pts = sorted((int(r[2]), float(r[6])) for r in group)
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        keep = y > 0
        ax.semilogy(x[keep], y[keep], marker="o", label=name)
    ax.set_xlabel("Gibbs iterations")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_exit(path: str, rows) -> None:
    """Extrinsic vs prior mutual information, one curve per detector per Eb/N0.

    rows: (detector, ebn0_db, I_a, I_e, bits).
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    groups: dict[str, list] = {}
    for row in rows:
        label = f"{row[0]} @ {float(row[1]):g} dB"
        groups.setdefault(label, []).append(row)
    for name, group in sorted(groups.items()):
        pts = sorted((float(r[2]), float(r[3])) for r in group)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
    ax.set_xlabel("prior mutual information I_a")
    ax.set_ylabel("extrinsic mutual information I_e")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_trace(path: str, determinism: np.ndarray, errors: np.ndarray, title: str) -> None:
    """Per-sampler heatmaps of bit-step determinism and state error.

    determinism, errors: (n_gibbs, n_iter, n_bits) matrices from
    metrics.trace_matrices, flattened along (iteration, bit) for display.
    """
    n_gibbs = determinism.shape[0]
    det2d = determinism.reshape(n_gibbs, -1)
    err2d = errors.reshape(n_gibbs, -1)
    fig, axes = plt.subplots(2, 1, figsize=(8.0, 4.8), sharex=True)
    im0 = axes[0].imshow(det2d, aspect="auto", cmap="gray_r", vmin=0.0, vmax=1.0,
                         interpolation="nearest")
    axes[0].set_ylabel("sampler")
    axes[0].set_title(f"{title}: bit-step determinism |2p-1|")
    fig.colorbar(im0, ax=axes[0])
    im1 = axes[1].imshow(err2d, aspect="auto", cmap="gray_r", vmin=0.0, vmax=1.0,
                         interpolation="nearest")
    axes[1].set_ylabel("sampler")
    axes[1].set_xlabel("bit-step (iteration-major)")
    axes[1].set_title("state error vs transmitted bits")
    fig.colorbar(im1, ax=axes[1])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
