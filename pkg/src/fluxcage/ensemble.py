"""Seeded disorder ensembles and 2D fluctuation phase-diagram sweeps.

Reproducibility contract: every disorder realization is generated by a
Philox 4x64 counter-based generator keyed with (seed, realization index),
so realization r is identical no matter how many realizations run, in what
order, or on how many threads.  Grid points and realizations are embarrassed
parallel work units; results are written into preallocated arrays by index
and reduced in a fixed order, which makes every output independent of the
worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np

from .diagnostics import fluctuation, ipn_series
from .dynamics import (
    DEFAULT_RK4_DT,
    TimeGrid,
    evolve_lindblad,
    initial_density,
    propagate_state,
    single_site_state,
    uniform_decay_trajectory,
)
from .lattice import (
    DisorderAssignment,
    FluxConfig,
    LatticeSpec,
    build_real_hamiltonian,
    c_site,
    caging_flux_even,
    center_site,
    flat_band_check,
)

SWEEP_AXIS_NAMES = ("phi", "delta", "gamma", "gamma_nh")

#: Default output grid for fluctuation statistics: 300 samples over 150 pi/J.
SIGMA_GRID = TimeGrid(t_max=150.0, samples=300)

_MAX_U64 = 2 ** 64


@dataclass(frozen=True)
class EnsembleSpec:
    """Random-disorder ensemble: uniform magnitudes on [0, delta_max]."""

    base: LatticeSpec
    delta_max: float
    reps: int
    seed: int

    def __post_init__(self):
        if not (math.isfinite(self.delta_max) and self.delta_max >= 0):
            raise ValueError(f"delta_max must be >= 0, got {self.delta_max}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ValueError(f"reps must be an integer >= 1, got {self.reps}")
        if not 0 <= int(self.seed) < _MAX_U64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "reps", int(self.reps))
        object.__setattr__(self, "seed", int(self.seed))


def disorder_stream(seed: int, rep_index: int) -> np.random.Generator:
    """Philox stream for one realization; key = (seed, rep_index)."""
    key = np.array([seed, rep_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_disorder(spec: EnsembleSpec, rep_index: int) -> Dict[int, float]:
    """On-site energy map for realization ``rep_index``.

    Per cell gap two independent magnitudes are drawn uniformly from
    [0, delta_max]; the first enters with a plus sign on C_{n,1} and the
    second with a minus sign on C_{n,N}.  Draw order is gap-major
    (C_{1,1}, C_{1,N}, C_{2,1}, ...), which is part of the reproducibility
    contract.
    """
    if not 0 <= rep_index < spec.reps:
        raise ValueError(f"rep_index {rep_index} outside 0..{spec.reps - 1}")
    base = spec.base
    gen = disorder_stream(spec.seed, rep_index)
    u = spec.delta_max * gen.random(2 * (base.cells - 1))
    values: Dict[int, float] = {}
    for gap in range(1, base.cells):
        values[c_site(gap, 1, base.paths)] = u[2 * (gap - 1)]
        values[c_site(gap, base.paths, base.paths)] = -u[2 * (gap - 1) + 1]
    return values


@dataclass
class EnsembleResult:
    grid: TimeGrid
    mean_ipn: np.ndarray
    mean_populations: np.ndarray
    reps: int
    seed: int
    ipn_definition: str


def _map_indexed(worker: Callable, count: int, workers: int):
    """Run ``worker(i)`` for i in range(count), results ordered by index."""
    if workers <= 1 or count <= 1:
        return [worker(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(count)))


def run_trajectory(spec: LatticeSpec, grid: TimeGrid,
                   site: Optional[int] = None,
                   ipn_definition: str = "per_site",
                   ipn_normalization: str = "renormalized",
                   lindblad_fast_path: bool = True,
                   dt: float = DEFAULT_RK4_DT,
                   rk4_dt: float = DEFAULT_RK4_DT):
    """Evolve one realization with the engine its parameters demand.

    Returns (trajectory, ipn_series).  Closed Hermitian points use exact
    spectral propagation, dissipative points the uniform-decay envelope or
    the full master-equation integrator, non-Hermitian points the scaled
    eigenpropagation with RK4 fallback.
    """
    psi0 = single_site_state(spec.size, site or center_site(spec.cells, spec.paths))
    if spec.gamma_diss > 0:
        if spec.gamma_nh != 0:
            raise ValueError("dissipation and non-Hermitian hopping cannot be combined")
        h = build_real_hamiltonian(replace(spec, gamma_diss=0.0))
        if lindblad_fast_path:
            traj = uniform_decay_trajectory(h, spec.gamma_diss, psi0, grid,
                                            coupling=spec.coupling)
        else:
            traj = evolve_lindblad(h, spec.gamma_diss, initial_density(psi0), grid,
                                   dt=dt, coupling=spec.coupling)
        return traj, ipn_series(traj, spec=spec)
    h = build_real_hamiltonian(spec)
    traj = propagate_state(h, psi0, grid, coupling=spec.coupling, rk4_dt=rk4_dt)
    return traj, ipn_series(traj, definition=ipn_definition,
                            normalization=ipn_normalization, spec=spec)


def ensemble_average(spec: EnsembleSpec, grid: TimeGrid,
                     site: Optional[int] = None,
                     ipn_definition: str = "per_site",
                     workers: int = 1,
                     rk4_dt: float = DEFAULT_RK4_DT) -> EnsembleResult:
    """Arithmetic mean of per-realization IPN series and population maps.

    Realizations are computed independently and summed in realization order;
    a failure in any one of them aborts the whole ensemble with its index.
    """
    base = spec.base

    def worker(rep):
        try:
            realization = base.with_site_values(draw_disorder(spec, rep))
            traj, series = run_trajectory(
                realization, grid, site=site, ipn_definition=ipn_definition,
                rk4_dt=rk4_dt,
            )
            return series.values, traj.populations
        except Exception as exc:
            raise RuntimeError(f"disorder realization {rep} failed: {exc}") from exc

    results = _map_indexed(worker, spec.reps, workers)
    ipn_sum = np.zeros(grid.samples)
    pop_sum = np.zeros_like(results[0][1])
    for vals, pops in results:  # fixed order: realization 0, 1, ...
        ipn_sum += vals
        pop_sum += pops
    return EnsembleResult(
        grid=grid,
        mean_ipn=ipn_sum / spec.reps,
        mean_populations=pop_sum / spec.reps,
        reps=spec.reps,
        seed=spec.seed,
        ipn_definition=ipn_definition,
    )


@dataclass(frozen=True)
class SweepAxis:
    """Uniform parameter axis; values within one part in 10^15 of zero are
    snapped to exactly 0 so symmetric ranges hit the clean-lattice point."""

    name: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.name not in SWEEP_AXIS_NAMES:
            raise ValueError(
                f"axis name must be one of {SWEEP_AXIS_NAMES}, got {self.name!r}"
            )
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"points must be an integer >= 2, got {self.points}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("axis endpoints must be finite")
        if not self.start < self.stop:
            raise ValueError(f"need start < stop, got [{self.start}, {self.stop}]")
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "stop", float(self.stop))
        object.__setattr__(self, "points", int(self.points))

    def values(self) -> np.ndarray:
        v = np.linspace(self.start, self.stop, self.points)
        span = self.stop - self.start
        v[np.abs(v) <= 1e-15 * span] = 0.0
        return v


def default_axis(name: str, coupling: float = 1.0, points: int = 81) -> SweepAxis:
    """Paper-scale default axis ranges, proportional to the coupling."""
    ranges = {
        "phi": (0.0, 2.0 * math.pi),
        "delta": (-2.0 * coupling, 2.0 * coupling),
        "gamma": (0.0, 0.05 * coupling),
        "gamma_nh": (-0.1 * coupling, 0.1 * coupling),
    }
    if name not in ranges:
        raise ValueError(f"axis name must be one of {SWEEP_AXIS_NAMES}, got {name!r}")
    lo, hi = ranges[name]
    return SweepAxis(name, lo, hi, points)


def _swept_flux(paths: int, phi: float) -> FluxConfig:
    """Flux family used for phi sweeps: the symmetric caging pattern with the
    caging angle replaced by the swept value."""
    if paths % 2:
        half = (paths - 1) // 2
        return FluxConfig(paths, (0.0,) + (phi,) * half + (-phi,) * half)
    return caging_flux_even(paths, base=phi, m=1)


def apply_axis_value(spec: LatticeSpec, name: str, value: float) -> LatticeSpec:
    if name == "phi":
        return replace(spec, flux=_swept_flux(spec.paths, value))
    if name == "delta":
        return replace(spec, disorder=DisorderAssignment(mode="fixed", magnitude=value))
    if name == "gamma":
        return replace(spec, gamma_diss=value)
    if name == "gamma_nh":
        return replace(spec, gamma_nh=value)
    raise ValueError(f"unknown axis name {name!r}")


@dataclass
class SweepGrid:
    axis_x: SweepAxis
    axis_y: SweepAxis
    sigma: np.ndarray  # (points_y, points_x)
    metadata: dict = field(default_factory=dict)


def _point_sigma(spec: LatticeSpec, grid: TimeGrid, site: Optional[int],
                 ipn_definition: str, ipn_normalization: str,
                 lindblad_fast_path: bool, dt: float, rk4_dt: float):
    """sigma of the IPN series at one parameter point; returns (sigma, engine)."""
    traj, series = run_trajectory(
        spec, grid, site=site, ipn_definition=ipn_definition,
        ipn_normalization=ipn_normalization,
        lindblad_fast_path=lindblad_fast_path, dt=dt, rk4_dt=rk4_dt,
    )
    return fluctuation(series).sigma, traj.engine


def sweep_sigma(base: LatticeSpec, axis_x: SweepAxis, axis_y: SweepAxis,
                grid: Optional[TimeGrid] = None,
                site: Optional[int] = None,
                ipn_definition: str = "per_site",
                ipn_normalization: str = "renormalized",
                workers: int = 1,
                lindblad_fast_path: bool = True,
                dt: float = DEFAULT_RK4_DT,
                rk4_dt: float = DEFAULT_RK4_DT) -> SweepGrid:
    """2D map of the IPN fluctuation sigma over two swept parameters.

    Each grid point gets the engine its parameters demand: exact spectral
    propagation for closed Hermitian points, the uniform-decay envelope (or
    the full master-equation integrator when ``lindblad_fast_path`` is off)
    for dissipative points, and non-Hermitian eigenpropagation otherwise.
    Failed points are recorded as NaN along with their indices in
    ``metadata["failures"]`` instead of aborting the sweep.
    """
    if axis_x.name == axis_y.name:
        raise ValueError("sweep axes must be distinct")
    grid = grid or SIGMA_GRID
    xs, ys = axis_x.values(), axis_y.values()
    sigma = np.full((axis_y.points, axis_x.points), np.nan)
    engines = set()
    failures = []

    def worker(flat_index):
        iy, ix = divmod(flat_index, axis_x.points)
        spec = apply_axis_value(base, axis_y.name, ys[iy])
        spec = apply_axis_value(spec, axis_x.name, xs[ix])
        try:
            value, engine = _point_sigma(
                spec, grid, site, ipn_definition, ipn_normalization,
                lindblad_fast_path, dt, rk4_dt,
            )
            return flat_index, value, engine, None
        except Exception as exc:
            return flat_index, float("nan"), None, str(exc)

    results = _map_indexed(worker, axis_y.points * axis_x.points, workers)
    for flat_index, value, engine, error in results:
        iy, ix = divmod(flat_index, axis_x.points)
        sigma[iy, ix] = value
        if engine is not None:
            engines.add(engine)
        if error is not None:
            failures.append({"iy": iy, "ix": ix, "error": error})
    metadata = {
        "axis_x": {"name": axis_x.name, "start": axis_x.start,
                   "stop": axis_x.stop, "points": axis_x.points},
        "axis_y": {"name": axis_y.name, "start": axis_y.start,
                   "stop": axis_y.stop, "points": axis_y.points},
        "t_max": grid.t_max,
        "samples": grid.samples,
        "ipn_definition": ipn_definition,
        "ipn_normalization": ipn_normalization,
        "engines": sorted(engines),
        "lindblad_fast_path": lindblad_fast_path,
        "failures": failures,
    }
    return SweepGrid(axis_x, axis_y, sigma, metadata)


@dataclass
class SweepCurve:
    parameter: str
    values: np.ndarray
    sigma: np.ndarray
    metadata: dict = field(default_factory=dict)


def sigma_vs_delta(base: LatticeSpec, delta_range=None, points: int = 41,
                   grid: Optional[TimeGrid] = None,
                   site: Optional[int] = None,
                   ipn_definition: str = "per_site",
                   workers: int = 1) -> SweepCurve:
    """sigma(Delta) along the fixed-disorder axis at the configured caging flux.

    Requires a flat-band flux in ``base`` so the Delta = 0 point is the ideal
    caged reference.
    """
    if not flat_band_check(base.flux):
        raise ValueError("sigma_vs_delta requires a flat-band flux in the base spec")
    grid = grid or SIGMA_GRID
    if delta_range is None:
        delta_range = (-2.0 * base.coupling, 2.0 * base.coupling)
    axis = SweepAxis("delta", delta_range[0], delta_range[1], points)
    deltas = axis.values()

    def worker(i):
        spec = apply_axis_value(base, "delta", deltas[i])
        value, _ = _point_sigma(spec, grid, site, ipn_definition,
                                "renormalized", True, DEFAULT_RK4_DT, DEFAULT_RK4_DT)
        return value

    sigma = np.array(_map_indexed(worker, points, workers))
    return SweepCurve(
        parameter="delta",
        values=deltas,
        sigma=sigma,
        metadata={"t_max": grid.t_max, "samples": grid.samples,
                  "ipn_definition": ipn_definition},
    )
