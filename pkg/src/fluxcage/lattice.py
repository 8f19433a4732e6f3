"""Multi-path flux lattice: geometry, flux families, and Hamiltonian builders.

The lattice is a 1D chain of hub sites A_1 .. A_M.  Between each adjacent
pair (A_n, A_{n+1}) sit N parallel bridge sites C_{n,1} .. C_{n,N}.  Hopping
from A_n into C_{n,i} carries a tunable phase exp(-i*phi_i); hopping from
C_{n,i} onward to A_{n+1} is a plain real coupling J.  When the phases
interfere destructively (sum_i cos(phi_i) = sum_i sin(phi_i) = 0) every
Bloch band is flat and an excitation stays caged around its starting hub.

Site ordering is cell-major, [A_1, C_{1,1..N}, A_2, C_{2,1..N}, ..., A_M],
and 1-based in every public interface, so A_n sits at global index
(n-1)*(N+1) + 1.  The 9-cell, 5-path chain used throughout the tests has
49 sites with the central hub A_5 at index 25.  Internally numpy arrays
are 0-based; conversion happens at the call boundary.

All types here are immutable after construction and the builders are pure
functions, so everything is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

#: Default tolerance separating a mis-configured flux from float noise.
FLAT_BAND_TOL = 1e-9

DISORDER_MODES = ("none", "fixed", "ensemble")


@dataclass(frozen=True)
class FluxConfig:
    """Per-path hopping phases for one cell gap.

    Phases are normalized into [0, 2*pi) on construction; the physics only
    depends on them modulo 2*pi.
    """

    paths: int
    phases: tuple = ()

    def __post_init__(self):
        if int(self.paths) != self.paths or self.paths < 1:
            raise ValueError(f"paths must be a positive integer, got {self.paths!r}")
        raw = tuple(float(p) for p in self.phases)
        if len(raw) != self.paths:
            raise ValueError(
                f"expected {self.paths} phases, got {len(raw)}"
            )
        if not all(math.isfinite(p) for p in raw):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "paths", int(self.paths))
        object.__setattr__(self, "phases", tuple(p % TWO_PI for p in raw))

    def phase_array(self) -> np.ndarray:
        return np.asarray(self.phases, dtype=float)


def flat_band_residuals(flux: FluxConfig) -> tuple:
    """Return (sum_i cos(phi_i), sum_i sin(phi_i))."""
    p = flux.phase_array()
    return float(np.cos(p).sum()), float(np.sin(p).sum())


def flat_band_check(flux: FluxConfig, tol: float = FLAT_BAND_TOL) -> bool:
    """True iff both interference sums vanish within ``tol``.

    A flux passing this check produces a fully flat band structure and an
    excitation caged to its starting cell.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    rc, rs = flat_band_residuals(flux)
    return abs(rc) <= tol and abs(rs) <= tol


def caging_flux_odd(paths: int) -> FluxConfig:
    """Caging flux family for an odd number of paths.

    One path carries phase 0, (N-1)/2 paths carry +phi and the remaining
    (N-1)/2 carry -phi with phi = arccos(-1/(N-1)), which zeroes both
    interference sums.
    """
    if paths % 2 == 0 or paths < 3:
        raise ValueError(
            f"odd caging family needs an odd path count >= 3, got {paths}"
        )
    phi = math.acos(-1.0 / (paths - 1))
    half = (paths - 1) // 2
    return FluxConfig(paths, (0.0,) + (phi,) * half + (-phi,) * half)


def caging_flux_even(paths: int, base: float = 0.0, m: int = 1) -> FluxConfig:
    """Caging flux family for an even number of paths.

    Half the paths carry ``base`` and the other half ``base + m*pi`` with odd
    ``m``; the two groups cancel pairwise for any ``base``.
    """
    if paths % 2 != 0 or paths < 2:
        raise ValueError(
            f"even caging family needs an even path count >= 2, got {paths}"
        )
    if m % 2 == 0:
        raise ValueError(f"m must be odd, got {m}")
    half = paths // 2
    base = float(base)
    return FluxConfig(paths, (base,) * half + (base + m * math.pi,) * half)


@dataclass(frozen=True)
class DisorderAssignment:
    """On-site energy assignment.

    mode
        "none": clean lattice.
        "fixed": +magnitude on every C_{n,1} and -magnitude on every C_{n,N}.
        "ensemble": per-realization magnitudes drawn uniformly from
        [0, magnitude]; must be resolved to explicit ``site_values`` (see
        :func:`fluxcage.ensemble.draw_disorder`) before a matrix can be built.
    site_values
        Optional map {1-based global site index: energy}. Entries override
        whatever the mode pattern assigns to those sites.

    The fixed-mode magnitude may be negative, which swaps the +/- pattern;
    the ensemble range maximum must be >= 0.
    """

    mode: str = "none"
    magnitude: float = 0.0
    site_values: Optional[Mapping[int, float]] = None

    def __post_init__(self):
        if self.mode not in DISORDER_MODES:
            raise ValueError(f"unknown disorder mode {self.mode!r}")
        mag = float(self.magnitude)
        if not math.isfinite(mag):
            raise ValueError("disorder magnitude must be finite")
        if self.mode == "ensemble" and mag < 0:
            raise ValueError("ensemble draw range maximum must be >= 0")
        object.__setattr__(self, "magnitude", mag)
        if self.site_values is not None:
            vals = {}
            for k, v in dict(self.site_values).items():
                ki, vf = int(k), float(v)
                if ki < 1:
                    raise ValueError(f"site indices are 1-based, got {ki}")
                if not math.isfinite(vf):
                    raise ValueError(f"on-site energy for site {ki} must be finite")
                vals[ki] = vf
            object.__setattr__(self, "site_values", vals)


@dataclass(frozen=True)
class LatticeSpec:
    """Full problem statement for one lattice realization.

    coupling sets the energy unit J and therefore the time unit pi/J used
    by every external interface.  gamma_nh adds -i*gamma_nh to every
    nearest-neighbor matrix element in both hopping directions (an
    anti-Hermitian addend); gamma_diss is the uniform per-site decay rate
    used by the Lindblad engine and does not enter the Hamiltonian.
    """

    cells: int
    flux: FluxConfig
    coupling: float = 1.0
    disorder: DisorderAssignment = field(default_factory=DisorderAssignment)
    gamma_nh: float = 0.0
    gamma_diss: float = 0.0

    def __post_init__(self):
        if int(self.cells) != self.cells or self.cells < 2:
            raise ValueError(f"cells must be an integer >= 2, got {self.cells!r}")
        object.__setattr__(self, "cells", int(self.cells))
        for name in ("coupling", "gamma_nh", "gamma_diss"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.coupling <= 0:
            raise ValueError(f"coupling must be > 0, got {self.coupling}")
        if self.gamma_diss < 0:
            raise ValueError(f"gamma_diss must be >= 0, got {self.gamma_diss}")

    @property
    def paths(self) -> int:
        return self.flux.paths

    @property
    def size(self) -> int:
        """Total site count: cells + (cells-1)*paths."""
        return total_sites(self.cells, self.paths)

    def with_site_values(self, site_values: Mapping[int, float]) -> "LatticeSpec":
        """Copy of this spec with disorder pinned to an explicit site map."""
        return replace(
            self,
            disorder=DisorderAssignment(mode="none", site_values=dict(site_values)),
        )


@dataclass(frozen=True)
class SiteIndex:
    """Classified lattice site: hub ("A") or bridge ("C")."""

    kind: str
    cell: int
    path: Optional[int]
    global_index: int


def total_sites(cells: int, paths: int) -> int:
    return cells + (cells - 1) * paths


def a_site(cell: int, paths: int) -> int:
    """1-based global index of hub A_cell."""
    if cell < 1:
        raise ValueError(f"cell must be >= 1, got {cell}")
    return (cell - 1) * (paths + 1) + 1


def c_site(cell: int, path: int, paths: int) -> int:
    """1-based global index of bridge C_{cell,path} (gap after A_cell)."""
    if not 1 <= path <= paths:
        raise ValueError(f"path must be in 1..{paths}, got {path}")
    if cell < 1:
        raise ValueError(f"cell must be >= 1, got {cell}")
    return (cell - 1) * (paths + 1) + 1 + path


def center_site(cells: int, paths: int) -> int:
    """Global index of the central hub A_ceil(cells/2), the default excitation point."""
    return a_site((cells + 1) // 2, paths)


def classify_site(global_index: int, cells: int, paths: int) -> SiteIndex:
    d = total_sites(cells, paths)
    if not 1 <= global_index <= d:
        raise ValueError(f"site index {global_index} outside 1..{d}")
    block, offset = divmod(global_index - 1, paths + 1)
    if offset == 0:
        return SiteIndex("A", block + 1, None, global_index)
    return SiteIndex("C", block + 1, offset, global_index)


def onsite_energies(spec: LatticeSpec) -> np.ndarray:
    """Resolve the disorder assignment to a dense vector of on-site energies.

    Ensemble-mode disorder has no concrete values until a realization is
    drawn, so it is rejected here unless ``site_values`` pins every entry.
    """
    dis = spec.disorder
    on = np.zeros(spec.size)
    if dis.mode == "fixed":
        for n in range(1, spec.cells):
            on[c_site(n, 1, spec.paths) - 1] = dis.magnitude
            on[c_site(n, spec.paths, spec.paths) - 1] = -dis.magnitude
    elif dis.mode == "ensemble" and dis.site_values is None:
        raise ValueError(
            "ensemble disorder has no concrete values; draw a realization first"
        )
    if dis.site_values is not None:
        for g, v in dis.site_values.items():
            if g > spec.size:
                raise ValueError(f"override site {g} outside 1..{spec.size}")
            on[g - 1] = v
    return on


def build_real_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    """Dense real-space Hamiltonian on the open chain.

    Hopping entries: <A_n|H|C_{n,i}> = J*exp(-i*phi_i) - i*Gamma and
    <A_{n+1}|H|C_{n,i}> = J - i*Gamma, with the reverse direction carrying
    the conjugate of the J part plus the same -i*Gamma addend, so the matrix
    is exactly Hermitian iff Gamma == 0.  The diagonal carries the resolved
    on-site energies.  Edge hubs couple into a single gap (open boundaries).
    """
    n_paths = spec.paths
    j = spec.coupling
    gnh = spec.gamma_nh
    d = spec.size
    h = np.zeros((d, d), dtype=complex)
    phases = spec.flux.phase_array()
    forward = j * np.exp(-1j * phases)  # A_n -> C_{n,i}
    for n in range(1, spec.cells):
        ia = a_site(n, n_paths) - 1
        ia_next = a_site(n + 1, n_paths) - 1
        for i in range(n_paths):
            ic = c_site(n, i + 1, n_paths) - 1
            h[ia, ic] = forward[i] - 1j * gnh
            h[ic, ia] = np.conj(forward[i]) - 1j * gnh
            h[ia_next, ic] = j - 1j * gnh
            h[ic, ia_next] = j - 1j * gnh
    h[np.diag_indices(d)] = onsite_energies(spec)
    return h


def build_bloch_hamiltonian(flux: FluxConfig, k: float, coupling: float = 1.0) -> np.ndarray:
    """(N+1)x(N+1) momentum-space star matrix at momentum ``k``.

    First row J_i = J*(exp(-i*phi_i) + exp(-i*k)), first column its
    conjugate, zeros elsewhere; Hermitian by construction.
    """
    k = float(k)
    if not math.isfinite(k):
        raise ValueError("k must be finite")
    couplings = coupling * (np.exp(-1j * flux.phase_array()) + np.exp(-1j * k))
    h = np.zeros((flux.paths + 1, flux.paths + 1), dtype=complex)
    h[0, 1:] = couplings
    h[1:, 0] = np.conj(couplings)
    return h
