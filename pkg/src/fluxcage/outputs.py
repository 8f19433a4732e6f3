"""On-disk output formats.

Format contract (see README for column-by-column details):

* every float is written as its shortest round-trip decimal (``repr``),
  so byte-identical files mean bit-identical numbers;
* all files are written atomically (temp file + rename in the target dir);
* manifests are JSON with sorted keys and no volatile fields (timings go
  to the console), so a rerun with the same seed and config reproduces
  CSV and JSON outputs byte for byte.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

from .diagnostics import IpnSeries
from .dynamics import Trajectory
from .ensemble import SweepGrid
from .spectra import BandStructure


def fmt(value) -> str:
    """Shortest decimal that round-trips to the same float64."""
    return repr(float(value))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, rows: Iterable[Sequence[str]]) -> None:
    _atomic_write(path, "\n".join(",".join(row) for row in rows) + "\n")


def _site_headers(n_sites: int, has_virtual: bool):
    cols = [f"site_{i}" for i in range(1, n_sites + 1)]
    if has_virtual:
        cols.append("virtual")
    return cols


def write_trajectory_csv(path: str, traj: Trajectory) -> None:
    """Columns: t, site_1..site_D[, virtual], norm.  Raw populations."""
    times = traj.grid.times()
    header = ["t"] + _site_headers(traj.sites, traj.has_virtual) + ["norm"]
    rows = [header]
    for s in range(traj.grid.samples):
        rows.append(
            [fmt(times[s])]
            + [fmt(v) for v in traj.populations[s]]
            + [fmt(traj.norm[s])]
        )
    write_csv(path, rows)


def write_heatmap_csv(path: str, traj: Trajectory) -> None:
    """Columns: t, site_1..site_D[, virtual] (populations only)."""
    times = traj.grid.times()
    header = ["t"] + _site_headers(traj.sites, traj.has_virtual)
    rows = [header]
    for s in range(traj.grid.samples):
        rows.append([fmt(times[s])] + [fmt(v) for v in traj.populations[s]])
    write_csv(path, rows)


def write_ipn_csv(path: str, series: IpnSeries) -> None:
    times = series.grid.times()
    rows = [["t", "ipn"]]
    rows += [[fmt(times[s]), fmt(series.values[s])] for s in range(len(times))]
    write_csv(path, rows)


def write_mean_ipn_csv(path: str, times: np.ndarray, values: np.ndarray) -> None:
    rows = [["t", "mean_ipn"]]
    rows += [[fmt(t), fmt(v)] for t, v in zip(times, values)]
    write_csv(path, rows)


def write_band_csv(path: str, bands: BandStructure) -> None:
    """Columns: k, E_1..E_{N+1} (ascending bands)."""
    n_bands = bands.energies.shape[1]
    rows = [["k"] + [f"E_{i}" for i in range(1, n_bands + 1)]]
    for s in range(len(bands.k_grid)):
        rows.append([fmt(bands.k_grid[s])] + [fmt(e) for e in bands.energies[s]])
    write_csv(path, rows)


def write_sweep_csv(path: str, grid: SweepGrid) -> None:
    """Two axis header rows, then the sigma matrix (one row per y value).

    Row 1: ``axis_x,<name>,v1,...,vNx``; row 2 the same for y; rows 3..
    hold the points_y x points_x sigma values.
    """
    rows = [
        ["axis_x", grid.axis_x.name] + [fmt(v) for v in grid.axis_x.values()],
        ["axis_y", grid.axis_y.name] + [fmt(v) for v in grid.axis_y.values()],
    ]
    for iy in range(grid.axis_y.points):
        rows.append([fmt(v) for v in grid.sigma[iy]])
    write_csv(path, rows)


def read_sweep_csv(path: str):
    """Inverse of :func:`write_sweep_csv`; returns (x_name, xs, y_name, ys, sigma)."""
    with open(path) as handle:
        lines = [line.strip().split(",") for line in handle if line.strip()]
    x_name, xs = lines[0][1], np.array([float(v) for v in lines[0][2:]])
    y_name, ys = lines[1][1], np.array([float(v) for v in lines[1][2:]])
    sigma = np.array([[float(v) for v in row] for row in lines[2:]])
    return x_name, xs, y_name, ys, sigma


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    return obj


def write_manifest_json(path: str, payload: dict) -> None:
    """Deterministic manifest: sorted keys, no timestamps or timings."""
    _atomic_write(path, json.dumps(_json_safe(payload), sort_keys=True, indent=2) + "\n")


# --- SVG rendering (matplotlib, Agg) -------------------------------------
# Color identity is not part of any contract; the CSV matrices are the
# quantitative output.  The date metadata is suppressed so reruns produce
# identical files.


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def write_heatmap_svg(path: str, traj: Trajectory, title: str = "") -> None:
    """Site-time population map; x = t (pi/J), y = 1-based site index."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    data = traj.populations.T  # (sites[, +virtual], samples)
    mesh = ax.imshow(
        data,
        aspect="auto",
        origin="lower",
        cmap="viridis",
        extent=(0.0, traj.grid.t_max, 0.5, data.shape[0] + 0.5),
        interpolation="nearest",
    )
    ax.set_xlabel("t (pi/J)")
    ax.set_ylabel("site index")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="population")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_mean_heatmap_svg(path: str, times: np.ndarray, populations: np.ndarray,
                           title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    mesh = ax.imshow(
        populations.T,
        aspect="auto",
        origin="lower",
        cmap="viridis",
        extent=(float(times[0]), float(times[-1]), 0.5, populations.shape[1] + 0.5),
        interpolation="nearest",
    )
    ax.set_xlabel("t (pi/J)")
    ax.set_ylabel("site index")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="mean population")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_sweep_svg(path: str, grid: SweepGrid, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    mesh = ax.imshow(
        grid.sigma,
        aspect="auto",
        origin="lower",
        cmap="viridis",
        extent=(grid.axis_x.start, grid.axis_x.stop,
                grid.axis_y.start, grid.axis_y.stop),
        interpolation="nearest",
    )
    ax.set_xlabel(grid.axis_x.name)
    ax.set_ylabel(grid.axis_y.name)
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="sigma")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
