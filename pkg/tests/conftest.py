import numpy as np
import pytest

import fluxcage as fc

OMEGA5 = np.sqrt(10.0)  # bright-state coupling for N = 5, in units of J


@pytest.fixture(scope="session")
def caging_flux():
    return fc.caging_flux_odd(5)


@pytest.fixture(scope="session")
def caging_spec(caging_flux):
    """The 9-cell, 5-path, 49-site reference lattice at the caging flux."""
    return fc.LatticeSpec(cells=9, flux=caging_flux)


@pytest.fixture(scope="session")
def zero_flux_spec():
    return fc.LatticeSpec(cells=9, flux=fc.FluxConfig(5, (0.0,) * 5))


def center_excitation(spec):
    return fc.single_site_state(spec.size, fc.center_site(spec.cells, spec.paths))


def caging_ipn_closed_form(taus, paths=5):
    """Per-site IPN of the exactly caged two-level oscillation.

    Hub population cos^2(sqrt(2N) J t) and 2N bridge sites at
    sin^2(sqrt(2N) J t)/(2N) give IPN = cos^4 + sin^4/(2N); taus are in
    units of pi/J.
    """
    theta = np.sqrt(2.0 * paths) * np.pi * np.asarray(taus)
    return np.cos(theta) ** 4 + np.sin(theta) ** 4 / (2.0 * paths)
