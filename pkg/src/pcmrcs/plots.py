"""Optional SVG renderings of CLI CSV outputs (needs matplotlib)."""

from __future__ import annotations

from pathlib import Path

from .io import read_csv


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "pcmrcs"  # stable element ids
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_xy(csv_path, x_col: str, y_cols, out_path, ylabel="") -> Path:
    plt = _plt()
    header, data = read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in y_cols:
        ax.plot(data[:, header.index(x_col)], data[:, header.index(col)], label=col)
    ax.set_xlabel(x_col)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, Path(out_path))
    plt.close(fig)
    return Path(out_path)


def plot_pattern(csv_path, out_path) -> Path:
    """theta-phi map of sigma (dBsm) from a pattern CSV."""
    plt = _plt()
    header, data = read_csv(csv_path)
    th, ph, s = (data[:, header.index(c)] for c in ("theta_deg", "phi_deg", "sigma_dbsm"))
    nphi = len(set(ph.tolist()))
    fig, ax = plt.subplots(figsize=(6, 4))
    m = ax.pcolormesh(
        ph.reshape(-1, nphi), th.reshape(-1, nphi), s.reshape(-1, nphi), shading="nearest", rasterized=True
    )
    fig.colorbar(m, ax=ax, label="sigma (dBsm)")
    ax.set_xlabel("phi (deg)")
    ax.set_ylabel("theta (deg)")
    fig.tight_layout()
    _save(fig, Path(out_path))
    plt.close(fig)
    return Path(out_path)
