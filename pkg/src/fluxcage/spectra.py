"""Band structure and dense eigendecomposition services.

The analytic dispersion and the direct diagonalization of the momentum-space
star matrix are kept as two independent routes; ``band_structure`` runs both
and refuses to return if they disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lattice import FluxConfig, build_bloch_hamiltonian

_HERMITICITY_RTOL = 1e-9
_RECONSTRUCTION_RTOL = 1e-8


class IllConditionedError(RuntimeError):
    """Eigenbasis too ill-conditioned to trust; callers fall back to RK4."""


@dataclass(frozen=True)
class BandStructure:
    """Sorted eigenvalues over a uniform momentum grid in [-pi, pi].

    ``energies[s]`` holds the N+1 ascending band energies at ``k_grid[s]``;
    ``flatness`` is the spread (max - min) of the top band.
    """

    k_grid: np.ndarray
    energies: np.ndarray
    flatness: float


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    hermitian: bool


def dispersion(flux: FluxConfig, coupling: float = 1.0, k=0.0):
    """Analytic top-band energy E_k; accepts scalar or array momenta.

    E_k = sqrt(sum_i 2 J^2 (1 + cos(phi_i)cos(k) + sin(phi_i)sin(k))); each
    radicand term is 1 + cos(phi_i - k) >= 0, so the root is always real.
    """
    k_arr = np.asarray(k, dtype=float)
    p = flux.phase_array()
    radicand = 2.0 * coupling ** 2 * (
        1.0
        + np.cos(p) * np.cos(k_arr[..., None])
        + np.sin(p) * np.sin(k_arr[..., None])
    ).sum(axis=-1)
    out = np.sqrt(np.maximum(radicand, 0.0))
    return float(out) if np.isscalar(k) or out.ndim == 0 else out


def band_structure(flux: FluxConfig, coupling: float = 1.0, k_points: int = 201) -> BandStructure:
    """Diagonalize the star matrix over a uniform momentum grid.

    Cross-checks the numerically obtained top band against the analytic
    dispersion at every k (tolerance 1e-10 * J) before reporting flatness.
    """
    if k_points < 2:
        raise ValueError(f"k_points must be >= 2, got {k_points}")
    k_grid = np.linspace(-math.pi, math.pi, k_points)
    energies = np.empty((k_points, flux.paths + 1))
    for s, k in enumerate(k_grid):
        energies[s] = scipy.linalg.eigvalsh(build_bloch_hamiltonian(flux, k, coupling))
    top = energies[:, -1]
    analytic = dispersion(flux, coupling, k_grid)
    dev = np.abs(top - analytic).max()
    if dev > 1e-10 * coupling:
        raise RuntimeError(
            f"top band deviates from analytic dispersion by {dev:.3e}"
        )
    return BandStructure(k_grid, energies, float(top.max() - top.min()))


def _hermiticity_defect(h: np.ndarray) -> float:
    return float(np.abs(h - h.conj().T).max())


def eigendecompose_hermitian(h: np.ndarray) -> EigenDecomposition:
    """Full spectrum and orthonormal eigenvectors of a Hermitian matrix.

    Rejects input whose Hermiticity defect exceeds 1e-9 * ||H||; solver
    non-convergence surfaces as scipy's LinAlgError.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"need a square matrix, got shape {h.shape}")
    scale = np.linalg.norm(h)
    if scale > 0 and _hermiticity_defect(h) > _HERMITICITY_RTOL * scale:
        raise ValueError(
            f"matrix is not Hermitian (defect {_hermiticity_defect(h):.3e}, norm {scale:.3e})"
        )
    eigenvalues, eigenvectors = scipy.linalg.eigh(h)
    return EigenDecomposition(eigenvalues, eigenvectors, hermitian=True)


def eigendecompose_general(h: np.ndarray) -> EigenDecomposition:
    """Complex eigenvalues and right eigenvectors of a general square matrix.

    Normal matrices (H H^dagger = H^dagger H) are diagonalized through the
    complex Schur form, whose unitary basis stays well-conditioned under the
    heavy eigenvalue degeneracy this lattice produces.  Otherwise the plain
    eigensolver is used and the reconstruction V diag(w) V^-1 is verified
    against H; a residual above 1e-8 * ||H|| means the eigenbasis is too
    close to defective and raises :class:`IllConditionedError` so the caller
    can switch to direct integration.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"need a square matrix, got shape {h.shape}")
    scale = np.linalg.norm(h)
    if scale > 0:
        adjoint = h.conj().T
        if np.linalg.norm(h @ adjoint - adjoint @ h) <= 1e-12 * scale ** 2:
            t, z = scipy.linalg.schur(h, output="complex")
            eigenvalues = np.diag(t).copy()
            if np.linalg.norm((z * eigenvalues) @ z.conj().T - h) <= \
                    _RECONSTRUCTION_RTOL * scale:
                return EigenDecomposition(eigenvalues, z, hermitian=False)
    eigenvalues, eigenvectors = scipy.linalg.eig(h)
    if scale > 0:
        try:
            # V diag(w) V^-1 without forming the inverse: solve V.T X = (V diag(w)).T
            rebuilt = np.linalg.solve(
                eigenvectors.T, (eigenvalues * eigenvectors).T
            ).T
        except np.linalg.LinAlgError as exc:
            raise IllConditionedError("eigenvector matrix is singular") from exc
        residual = np.linalg.norm(rebuilt - h)
        if residual > _RECONSTRUCTION_RTOL * scale:
            raise IllConditionedError(
                f"eigenbasis reconstruction residual {residual:.3e} "
                f"exceeds {_RECONSTRUCTION_RTOL:.0e} * ||H||"
            )
    return EigenDecomposition(eigenvalues, eigenvectors, hermitian=False)
