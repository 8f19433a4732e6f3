"""Localization metrics: inverse participation number variants, the time
fluctuation used as a steady-state localization criterion, and heatmap
assembly.

The per-site IPN sum(p_i^2) of a normalized population vector saturates its
upper bound 1 on a single-site state and falls to 1/M for uniform spread
over M sites.  The per-cell variant first groups populations into hub+gap
blocks before squaring and is always >= the per-site value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .dynamics import TimeGrid, Trajectory
from .lattice import LatticeSpec

IPN_DEFINITIONS = ("per_site", "per_cell")
IPN_NORMALIZATIONS = ("raw", "renormalized")


@dataclass(frozen=True)
class IpnSeries:
    grid: TimeGrid
    values: np.ndarray
    definition: str = "per_site"
    normalization: str = "renormalized"


@dataclass(frozen=True)
class FluctuationResult:
    mean_ipn: float
    mean_sq_ipn: float
    sigma: float


def _prepare(populations, renormalize: bool) -> np.ndarray:
    p = np.asarray(populations, dtype=float)
    if p.size == 0:
        raise ValueError("empty population vector")
    if float(p.min()) < -1e-9:
        raise ValueError(f"populations must be nonnegative, min = {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    if renormalize:
        total = p.sum(axis=-1, keepdims=True)
        if np.any(total <= 1e-12):
            raise ValueError("cannot renormalize an (almost) all-zero population vector")
        p = p / total
    return p


def ipn_per_site(populations, renormalize: bool = True):
    """sum_i p_i^2 over the last axis; equals sum |psi_i|^4 for p_i = |psi_i|^2."""
    p = _prepare(populations, renormalize)
    return (p ** 2).sum(axis=-1)


def _cell_boundaries(spec: LatticeSpec) -> np.ndarray:
    # cell n spans [A_n, C_{n,1..N}]; the final cell is the lone last hub
    return np.arange(0, spec.size, spec.paths + 1)


def ipn_per_cell(populations, spec: LatticeSpec, renormalize: bool = True):
    """IPN after coarse-graining populations into per-cell blocks."""
    p = _prepare(populations, renormalize)
    if p.shape[-1] != spec.size:
        raise ValueError(
            f"population vector has {p.shape[-1]} entries, lattice has {spec.size} sites"
        )
    cells = np.add.reduceat(p, _cell_boundaries(spec), axis=-1)
    return (cells ** 2).sum(axis=-1)


def ipn_open_system(rho_diag):
    """IPN of an open-system diagonal including the virtual sink, no renormalization.

    The trace is already 1 along a valid master-equation trajectory; a
    deviation beyond 1e-4 indicates a broken input and raises.  Slightly
    negative entries (down to -1e-6) are fixed-step integration noise on
    exactly-zero populations and are clipped; anything more negative is a
    broken density matrix.
    """
    d = np.asarray(rho_diag, dtype=float)
    if float(d.min()) < -1e-6:
        raise ValueError(f"negative population {d.min():.3e} in density diagonal")
    total = d.sum(axis=-1)
    if np.any(np.abs(total - 1.0) > 1e-4):
        raise ValueError("density diagonal trace deviates from 1 by more than 1e-4")
    d = np.clip(d, 0.0, None)
    return (d ** 2).sum(axis=-1)


def ipn_series(traj: Trajectory, definition: str = "per_site",
               normalization: str = "renormalized",
               spec: Optional[LatticeSpec] = None) -> IpnSeries:
    """IPN at every trajectory sample.

    Open-system trajectories always use the sink-inclusive definition (the
    per-cell grouping is not defined once the sink is occupied).  For pure
    states "renormalized" divides each sample by its total population, which
    is the overflow-safe choice for non-Hermitian runs; "raw" squares the
    stored populations as-is.
    """
    if definition not in IPN_DEFINITIONS:
        raise ValueError(f"unknown IPN definition {definition!r}")
    if normalization not in IPN_NORMALIZATIONS:
        raise ValueError(f"unknown IPN normalization {normalization!r}")
    if traj.has_virtual:
        if definition == "per_cell":
            raise ValueError("per-cell IPN is not defined for open-system trajectories")
        values = ipn_open_system(traj.populations)
        return IpnSeries(traj.grid, values, "per_site", "raw")
    if normalization == "renormalized":
        p = traj.normalized_populations()
        renorm = False  # already unit total
    else:
        p = traj.populations
        renorm = False
    if definition == "per_cell":
        if spec is None:
            raise ValueError("per-cell IPN needs the lattice spec for the cell layout")
        with np.errstate(over="ignore"):
            values = ipn_per_cell(p, spec, renormalize=renorm)
    else:
        with np.errstate(over="ignore"):
            values = ipn_per_site(p, renormalize=renorm)
    return IpnSeries(traj.grid, values, definition, normalization)


def fluctuation(series: Union[IpnSeries, np.ndarray]) -> FluctuationResult:
    """Uniform-weight time statistics of a sampled series.

    The mean and mean square over the samples stand in for the window
    integrals; sigma = sqrt(mean_sq - mean^2), clamped at 0 against float
    cancellation.
    """
    values = series.values if isinstance(series, IpnSeries) else np.asarray(series, dtype=float)
    if values.size < 2:
        raise ValueError("need at least 2 samples")
    mean = float(values.mean())
    mean_sq = float((values ** 2).mean())
    return FluctuationResult(mean, mean_sq, float(np.sqrt(max(mean_sq - mean * mean, 0.0))))


def heatmap(traj: Trajectory) -> np.ndarray:
    """Row-per-sample population matrix (virtual column appended for open runs)."""
    return traj.populations.copy()


def envelope_crossing_time(times, values, threshold: float, window: float) -> float:
    """First time the forward-window running maximum stays below ``threshold``.

    ``window`` (same unit as ``times``) should cover at least one oscillation
    period so the crossing tracks the envelope rather than a transient dip.
    Returns inf if the envelope never drops below the threshold.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be matching 1-D arrays")
    if t.size < 2:
        raise ValueError("need at least 2 samples")
    span = int(np.ceil(window / (t[1] - t[0]))) + 1
    span = min(max(span, 1), v.size)
    running_max = sliding_window_view(v, span).max(axis=1)
    below = running_max < threshold
    if not below.any():
        return float("inf")
    return float(t[int(np.argmax(below))])
