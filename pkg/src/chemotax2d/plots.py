"""Figure rendering for completed runs.

Reads the delimited outputs of a run directory (diagnostics.csv and any
snap_*.txt files) and writes PNG figures next to them.  The CSV column
schema stays the primary contract; figures are a convenience layer on top
of it and never feed back into numerics.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def load_diagnostics(run_dir: Path) -> np.ndarray:
    path = Path(run_dir) / "diagnostics.csv"
    data = np.genfromtxt(path, delimiter=",", names=True)
    return np.atleast_1d(data)


def load_snapshot(path: Path) -> tuple[np.ndarray, dict]:
    """Snapshot array plus its header metadata (nx ny lx ly t field)."""
    with open(path) as fh:
        header = fh.readline()
    parts = header.lstrip("#").split()
    meta = {
        "nx": int(parts[0]),
        "ny": int(parts[1]),
        "lx": float(parts[2]),
        "ly": float(parts[3]),
        "t": float(parts[4]),
        "field": parts[5],
    }
    arr = np.loadtxt(path)
    if arr.shape != (meta["ny"], meta["nx"]):
        raise ValueError(f"snapshot {path} has shape {arr.shape}, header says "
                         f"({meta['ny']}, {meta['nx']})")
    return arr, meta


def render_report(run_dir: Path, out_dir: Path | None = None) -> list[Path]:
    """Render the standard figure set for one run directory."""
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir is not None else run_dir
    out.mkdir(parents=True, exist_ok=True)
    data = load_diagnostics(run_dir)
    t = data["t"]
    written: list[Path] = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("linf_u", "linf_v", "linf_w", "linf_z"):
        ax.plot(t, data[name], label=name.replace("linf_", "sup |") + "|")
    ax.set_xlabel("t")
    ax.set_ylabel("sup norm")
    if np.all(np.concatenate([data[n] for n in ("linf_u", "linf_v", "linf_w", "linf_z")]) > 0):
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    path = out / "norms.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, data["energy_y"], label="energy y(t)")
    ax.plot(t, data["l_log_l_u"], label="int u ln(u+e)", ls="--")
    ax.plot(t, data["l_log_l_w"], label="int w ln(w+e)", ls="--")
    ax.set_xlabel("t")
    ax.set_ylabel("functional value")
    ax.legend()
    fig.tight_layout()
    path = out / "energy.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, data["mass_u"], label="mass of u")
    ax.plot(t, data["mass_w"], label="mass of w")
    ax.set_xlabel("t")
    ax.set_ylabel("mass")
    ax.legend()
    fig.tight_layout()
    path = out / "mass.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    for snap in sorted(run_dir.glob("snap_*.txt")):
        arr, meta = load_snapshot(snap)
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(
            arr,
            origin="lower",
            extent=(0.0, meta["lx"], 0.0, meta["ly"]),
            aspect="equal",
            cmap="viridis",
        )
        fig.colorbar(im, ax=ax)
        ax.set_title(f"{meta['field']} at t = {meta['t']:.4g}")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        fig.tight_layout()
        path = out / (snap.stem + ".png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
