"""fluxcage: flat-band caging dynamics in 1D multi-path flux lattices.

Build lattice Hamiltonians with per-path hopping phases, verify flat-band
interference conditions, propagate closed, dissipative and non-Hermitian
single-excitation dynamics, and map localization through the inverse
participation number, its time fluctuation, and seeded disorder ensembles.
"""

__version__ = "0.1.0"

from .diagnostics import (
    FluctuationResult,
    IpnSeries,
    envelope_crossing_time,
    fluctuation,
    heatmap,
    ipn_open_system,
    ipn_per_cell,
    ipn_per_site,
    ipn_series,
)
from .dynamics import (
    TimeGrid,
    Trajectory,
    evolve_general,
    evolve_lindblad,
    evolve_rk4,
    evolve_spectral,
    initial_density,
    propagate_state,
    single_site_state,
    uniform_decay_trajectory,
)
from .ensemble import (
    EnsembleResult,
    EnsembleSpec,
    SweepAxis,
    SweepCurve,
    SweepGrid,
    default_axis,
    draw_disorder,
    ensemble_average,
    run_trajectory,
    sigma_vs_delta,
    sweep_sigma,
)
from .lattice import (
    DisorderAssignment,
    FluxConfig,
    LatticeSpec,
    SiteIndex,
    a_site,
    build_bloch_hamiltonian,
    build_real_hamiltonian,
    c_site,
    caging_flux_even,
    caging_flux_odd,
    center_site,
    classify_site,
    flat_band_check,
    flat_band_residuals,
    onsite_energies,
    total_sites,
)
from .spectra import (
    BandStructure,
    EigenDecomposition,
    IllConditionedError,
    band_structure,
    dispersion,
    eigendecompose_general,
    eigendecompose_hermitian,
)

__all__ = [
    "__version__",
    "BandStructure",
    "DisorderAssignment",
    "EigenDecomposition",
    "EnsembleResult",
    "EnsembleSpec",
    "FluctuationResult",
    "FluxConfig",
    "IllConditionedError",
    "IpnSeries",
    "LatticeSpec",
    "SiteIndex",
    "SweepAxis",
    "SweepCurve",
    "SweepGrid",
    "TimeGrid",
    "Trajectory",
    "a_site",
    "band_structure",
    "build_bloch_hamiltonian",
    "build_real_hamiltonian",
    "c_site",
    "caging_flux_even",
    "caging_flux_odd",
    "center_site",
    "classify_site",
    "default_axis",
    "dispersion",
    "draw_disorder",
    "eigendecompose_general",
    "eigendecompose_hermitian",
    "ensemble_average",
    "envelope_crossing_time",
    "evolve_general",
    "evolve_lindblad",
    "evolve_rk4",
    "evolve_spectral",
    "flat_band_check",
    "flat_band_residuals",
    "fluctuation",
    "heatmap",
    "initial_density",
    "ipn_open_system",
    "ipn_per_cell",
    "ipn_per_site",
    "ipn_series",
    "onsite_energies",
    "propagate_state",
    "run_trajectory",
    "sigma_vs_delta",
    "single_site_state",
    "sweep_sigma",
    "total_sites",
    "uniform_decay_trajectory",
]
