"""Time evolution engines for a single excitation.

Four engines share one :class:`Trajectory` container:

* ``evolve_spectral`` — exact propagation of a Hermitian Hamiltonian through
  its eigendecomposition.
* ``evolve_rk4`` — fixed-step classical RK4 on i d/dt psi = H psi for any
  (possibly non-Hermitian) H; stores raw, un-renormalized amplitudes.
* ``evolve_general`` — eigendecomposition propagation for non-Hermitian H
  with per-sample exponential rescaling so growing modes never overflow;
  falls back to RK4 if the eigenbasis is ill-conditioned.
* ``evolve_lindblad`` — RK4 on the full (D+1)^2 density matrix with a
  uniform-rate decay from every lattice site into one virtual sink level.

Time convention: every ``TimeGrid`` value is in units of pi/J.  The engines
convert to raw time internally via ``physical_times(coupling)``, so the
numeric value of the coupling never changes the physics, only the unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectra import IllConditionedError, eigendecompose_general, eigendecompose_hermitian

#: Default RK4 step, in units of pi/J.
DEFAULT_RK4_DT = 1e-3

_NORM_SQ_OVERFLOW = 1e12  # abort RK4 once ||psi||^2 exceeds this
_HERMITIAN_DISPATCH_ATOL = 1e-12  # relative to max|H|


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output grid: ``samples`` times from 0 to ``t_max`` (units pi/J)."""

    t_max: float
    samples: int

    def __post_init__(self):
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"t_max must be positive and finite, got {self.t_max}")
        if int(self.samples) != self.samples or self.samples < 2:
            raise ValueError(f"samples must be an integer >= 2, got {self.samples}")
        object.__setattr__(self, "t_max", float(self.t_max))
        object.__setattr__(self, "samples", int(self.samples))

    @property
    def spacing(self) -> float:
        return self.t_max / (self.samples - 1)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.samples)

    def physical_times(self, coupling: float = 1.0) -> np.ndarray:
        """Raw times: one grid unit equals pi/coupling."""
        return self.times() * (math.pi / coupling)


@dataclass
class Trajectory:
    """Sampled evolution record.

    populations
        (samples, D) raw site populations; for open-system runs the array is
        (samples, D+1) with the virtual sink as the last column.  For
        non-Hermitian runs the raw values can overflow to inf at strong
        growth; use :meth:`normalized_populations` downstream.
    norm
        Per-sample sum of populations (squared norm; trace for open runs).
    amplitudes
        (samples, D) complex amplitudes with exp(log_scale) factored out,
        or None when the engine evolves a density matrix.
    log_scale
        Per-sample natural log of the factored-out amplitude scale; zero for
        norm-preserving engines.
    """

    grid: TimeGrid
    populations: np.ndarray
    norm: np.ndarray
    amplitudes: Optional[np.ndarray] = None
    log_scale: Optional[np.ndarray] = None
    engine: str = ""
    has_virtual: bool = False
    final_density: Optional[np.ndarray] = None  # last rho, density-matrix engines only

    @property
    def sites(self) -> int:
        return self.populations.shape[1] - (1 if self.has_virtual else 0)

    def normalized_populations(self) -> np.ndarray:
        """Per-sample populations rescaled to unit total (overflow-safe)."""
        if self.amplitudes is not None:
            p = np.abs(self.amplitudes) ** 2
        else:
            p = self.populations
        total = p.sum(axis=1, keepdims=True)
        if np.any(total <= 0) or not np.all(np.isfinite(total)):
            raise ValueError("cannot normalize a sample with non-positive or non-finite total")
        return p / total


def single_site_state(size: int, site: int) -> np.ndarray:
    """Normalized single-excitation state at 1-based global ``site``."""
    if not 1 <= site <= size:
        raise ValueError(f"site {site} outside 1..{size}")
    psi = np.zeros(size, dtype=complex)
    psi[site - 1] = 1.0
    return psi


def initial_density(psi: np.ndarray) -> np.ndarray:
    """(D+1)x(D+1) pure density matrix with an empty virtual sink appended."""
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    rho = np.zeros((d + 1, d + 1), dtype=complex)
    rho[:d, :d] = np.outer(psi, psi.conj())
    return rho


def _check_normalized(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    n2 = float(np.vdot(psi, psi).real)
    if abs(n2 - 1.0) > 1e-9:
        raise ValueError(f"initial state must be normalized, got ||psi||^2 = {n2}")
    return psi


def evolve_spectral(h: np.ndarray, psi0: np.ndarray, grid: TimeGrid,
                    coupling: float = 1.0) -> Trajectory:
    """Exact Hermitian propagation psi(t) = V exp(-i w t) V^dagger psi0."""
    psi0 = _check_normalized(psi0)
    dec = eigendecompose_hermitian(h)
    t_phys = grid.physical_times(coupling)
    weights = dec.eigenvectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(t_phys, dec.eigenvalues))  # (S, D)
    amplitudes = (phases * weights) @ dec.eigenvectors.T  # (S, D)
    amplitudes[0] = psi0  # t = 0 is the input, exactly
    populations = np.abs(amplitudes) ** 2
    return Trajectory(
        grid=grid,
        populations=populations,
        norm=populations.sum(axis=1),
        amplitudes=amplitudes,
        log_scale=np.zeros(grid.samples),
        engine="spectral",
    )


def evolve_rk4(h: np.ndarray, psi0: np.ndarray, grid: TimeGrid,
               dt: float = DEFAULT_RK4_DT, coupling: float = 1.0) -> Trajectory:
    """Fixed-step RK4 on i d/dt psi = H psi; works for any square H.

    ``dt`` (units pi/J) must keep ||H|| * dt_phys <= 0.1 and must divide the
    sample spacing.  Non-Hermitian input is integrated as-is: the stored
    trajectory is never renormalized and the run aborts if the squared norm
    exceeds 1e12.
    """
    psi0 = _check_normalized(psi0)
    h = np.asarray(h, dtype=complex)
    if not 0 < dt:
        raise ValueError(f"dt must be positive, got {dt}")
    dt_phys = dt * math.pi / coupling
    h_norm = float(np.linalg.norm(h, 2))
    if dt_phys * h_norm > 0.1 + 1e-12:
        raise ValueError(
            f"dt too large: dt*||H|| = {dt_phys * h_norm:.3g} exceeds the 0.1 stability bound"
        )
    ratio = grid.spacing / dt
    n_sub = int(round(ratio))
    if n_sub < 1 or abs(ratio - n_sub) > 1e-9 * max(1.0, n_sub):
        raise ValueError(
            f"dt = {dt} does not divide the sample spacing {grid.spacing}"
        )
    step = grid.spacing * math.pi / coupling / n_sub

    amplitudes = np.empty((grid.samples, h.shape[0]), dtype=complex)
    amplitudes[0] = psi0
    psi = psi0.copy()
    for s in range(1, grid.samples):
        for _ in range(n_sub):
            k1 = -1j * (h @ psi)
            k2 = -1j * (h @ (psi + 0.5 * step * k1))
            k3 = -1j * (h @ (psi + 0.5 * step * k2))
            k4 = -1j * (h @ (psi + step * k3))
            psi += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        n2 = float(np.vdot(psi, psi).real)
        if not n2 < _NORM_SQ_OVERFLOW:
            raise RuntimeError(
                f"norm overflow at sample {s} (t = {grid.times()[s]:.4g}): "
                f"||psi||^2 = {n2:.3e}; the dynamics is exponentially growing"
            )
        amplitudes[s] = psi
    populations = np.abs(amplitudes) ** 2
    return Trajectory(
        grid=grid,
        populations=populations,
        norm=populations.sum(axis=1),
        amplitudes=amplitudes,
        log_scale=np.zeros(grid.samples),
        engine="rk4",
    )


def evolve_general(h: np.ndarray, psi0: np.ndarray, grid: TimeGrid,
                   coupling: float = 1.0, rk4_dt: float = DEFAULT_RK4_DT) -> Trajectory:
    """Eigendecomposition propagation for non-Hermitian H.

    Per sample the fastest-growing exponential is factored out into
    ``log_scale`` so the stored amplitudes stay finite at any time; raw
    populations are reconstructed as exp(2*log_scale)*|amplitudes|^2 and may
    saturate to inf where the true values exceed the float range.  An
    ill-conditioned eigenbasis triggers an RK4 fallback.
    """
    psi0 = _check_normalized(psi0)
    h = np.asarray(h, dtype=complex)
    try:
        dec = eigendecompose_general(h)
    except IllConditionedError:
        # pick the largest step that divides the sample spacing and respects
        # the RK4 stability bound
        bound = 0.099 * coupling / (math.pi * float(np.linalg.norm(h, 2)))
        dt = grid.spacing / max(1, math.ceil(grid.spacing / min(rk4_dt, bound)))
        traj = evolve_rk4(h, psi0, grid, dt=dt, coupling=coupling)
        traj.engine = "rk4-fallback"
        return traj
    weights = np.linalg.solve(dec.eigenvectors, psi0)
    t_phys = grid.physical_times(coupling)
    exponents = -1j * np.outer(t_phys, dec.eigenvalues)  # (S, D)
    log_scale = exponents.real.max(axis=1)
    scaled = np.exp(exponents - log_scale[:, None])
    amplitudes = (scaled * weights) @ dec.eigenvectors.T
    amplitudes[0] = psi0  # t = 0 is the input, exactly
    log_scale[0] = 0.0
    with np.errstate(over="ignore"):
        populations = np.exp(2.0 * log_scale)[:, None] * np.abs(amplitudes) ** 2
    return Trajectory(
        grid=grid,
        populations=populations,
        norm=populations.sum(axis=1),
        amplitudes=amplitudes,
        log_scale=log_scale,
        engine="general",
    )


def propagate_state(h: np.ndarray, psi0: np.ndarray, grid: TimeGrid,
                    coupling: float = 1.0, rk4_dt: float = DEFAULT_RK4_DT) -> Trajectory:
    """Route to the exact spectral engine when H is Hermitian, else to
    :func:`evolve_general`.

    The builders produce bit-exact Hermitian matrices whenever the
    non-Hermitian strength is zero, so a parameter sweep crossing zero goes
    through the identical code path as a purely Hermitian run.
    """
    h = np.asarray(h, dtype=complex)
    scale = float(np.abs(h).max()) if h.size else 0.0
    defect = float(np.abs(h - h.conj().T).max()) if h.size else 0.0
    if defect <= _HERMITIAN_DISPATCH_ATOL * max(scale, 1.0):
        return evolve_spectral(h, psi0, grid, coupling=coupling)
    return evolve_general(h, psi0, grid, coupling=coupling, rk4_dt=rk4_dt)


def uniform_decay_trajectory(h: np.ndarray, gamma: float, psi0: np.ndarray,
                             grid: TimeGrid, coupling: float = 1.0) -> Trajectory:
    """Closed-form open-system trajectory for uniform per-site decay.

    With every lattice site decaying into the sink at the same rate the
    lattice block of the density matrix factorizes exactly into
    exp(-gamma*t) times the unitary evolution, and the sink population is
    1 - exp(-gamma*t).  This is the fast path used for phase-diagram sweeps;
    the full RK4 integrator (:func:`evolve_lindblad`) is the reference it is
    tested against.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    closed = evolve_spectral(h, psi0, grid, coupling=coupling)
    envelope = np.exp(-gamma * grid.physical_times(coupling))
    populations = np.empty((grid.samples, closed.populations.shape[1] + 1))
    populations[:, :-1] = envelope[:, None] * closed.populations
    populations[:, -1] = 1.0 - envelope
    return Trajectory(
        grid=grid,
        populations=populations,
        norm=populations.sum(axis=1),
        engine="lindblad-envelope",
        has_virtual=True,
    )


def _lindblad_rhs(h_full: np.ndarray, gamma: float, d: int, rho: np.ndarray,
                  out: np.ndarray, tmp: np.ndarray) -> np.ndarray:
    """d rho/dt for jump operators sqrt(gamma)|v><k|, one per lattice site k.

    Summing the jump terms analytically gives
    gamma * (tr_lat(rho) |v><v| - {P_lat, rho}/2), which this computes
    without materializing the D jump matrices.
    """
    np.matmul(h_full, rho, out=out)
    np.matmul(rho, h_full, out=tmp)
    out -= tmp
    out *= -1j
    if gamma:
        out[:d, :] -= (0.5 * gamma) * rho[:d, :]
        out[:, :d] -= (0.5 * gamma) * rho[:, :d]
        out[d, d] += gamma * (np.trace(rho) - rho[d, d])
    return out


def evolve_lindblad(h: np.ndarray, gamma: float, rho0: np.ndarray, grid: TimeGrid,
                    dt: float = DEFAULT_RK4_DT, coupling: float = 1.0) -> Trajectory:
    """RK4 integration of the master equation with a uniform virtual-state sink.

    ``h`` is the Hermitian D x D lattice Hamiltonian; it is embedded into
    D+1 dimensions with a zero row/column for the sink.  ``rho0`` must be a
    valid (D+1)x(D+1) density matrix.  The trace is monitored every sample
    and a drift beyond 1e-4 aborts with a step-size diagnostic.
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    scale = float(np.linalg.norm(h))
    if scale > 0 and float(np.abs(h - h.conj().T).max()) > 1e-9 * scale:
        raise ValueError("lattice Hamiltonian must be Hermitian for Lindblad evolution")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (d + 1, d + 1):
        raise ValueError(
            f"rho0 must be ({d + 1}, {d + 1}) including the virtual state, got {rho0.shape}"
        )
    if float(np.abs(rho0 - rho0.conj().T).max()) > 1e-9:
        raise ValueError("rho0 must be Hermitian")
    tr0 = float(np.trace(rho0).real)
    if abs(tr0 - 1.0) > 1e-6:
        raise ValueError(f"rho0 must have unit trace, got {tr0}")
    if float(np.diag(rho0).real.min()) < -1e-9:
        raise ValueError("rho0 diagonal must be nonnegative")

    ratio = grid.spacing / dt
    n_sub = int(round(ratio))
    if n_sub < 1 or abs(ratio - n_sub) > 1e-9 * max(1.0, n_sub):
        raise ValueError(f"dt = {dt} does not divide the sample spacing {grid.spacing}")
    step = grid.spacing * math.pi / coupling / n_sub

    h_full = np.zeros((d + 1, d + 1), dtype=complex)
    h_full[:d, :d] = h

    rho = rho0.copy()
    size = d + 1
    k1, k2, k3, k4 = (np.empty((size, size), dtype=complex) for _ in range(4))
    tmp = np.empty((size, size), dtype=complex)
    stage = np.empty((size, size), dtype=complex)

    populations = np.empty((grid.samples, size))
    norm = np.empty(grid.samples)
    populations[0] = np.diag(rho).real
    norm[0] = populations[0].sum()
    for s in range(1, grid.samples):
        for _ in range(n_sub):
            _lindblad_rhs(h_full, gamma, d, rho, k1, tmp)
            np.multiply(k1, 0.5 * step, out=stage)
            stage += rho
            _lindblad_rhs(h_full, gamma, d, stage, k2, tmp)
            np.multiply(k2, 0.5 * step, out=stage)
            stage += rho
            _lindblad_rhs(h_full, gamma, d, stage, k3, tmp)
            np.multiply(k3, step, out=stage)
            stage += rho
            _lindblad_rhs(h_full, gamma, d, stage, k4, tmp)
            k2 += k3
            k2 *= 2.0
            k1 += k4
            k1 += k2
            k1 *= step / 6.0
            rho += k1
        diag = np.diag(rho).real
        tr = diag.sum()
        if abs(tr - 1.0) > 1e-4:
            raise RuntimeError(
                f"trace drifted to {tr:.6f} at sample {s}; reduce dt "
                f"(currently {dt}) or the time window"
            )
        populations[s] = diag
        norm[s] = tr
    return Trajectory(
        grid=grid,
        populations=populations,
        norm=norm,
        engine="lindblad",
        has_virtual=True,
        final_density=rho,
    )
