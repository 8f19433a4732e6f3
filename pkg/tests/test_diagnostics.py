import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

import fluxcage as fc

from conftest import caging_ipn_closed_form, center_excitation

population_vectors = arrays(
    np.float64,
    st.integers(2, 60),
    elements=st.floats(0.0, 1.0, allow_nan=False),
).filter(lambda p: p.sum() > 1e-6)


class TestIpnPerSite:
    def test_single_site_saturates_bound(self):
        p = np.zeros(49)
        p[10] = 1.0
        assert fc.ipn_per_site(p) == 1.0

    def test_uniform_spread(self):
        assert fc.ipn_per_site(np.full(49, 1.0 / 49.0)) == pytest.approx(1.0 / 49.0)

    def test_caged_state_at_half_period(self):
        # hub empty, ten bridges at 1/10 each
        p = np.zeros(49)
        for n, i in ((4, 1), (4, 2), (4, 3), (4, 4), (4, 5),
                     (5, 1), (5, 2), (5, 3), (5, 4), (5, 5)):
            p[fc.c_site(n, i, 5) - 1] = 0.1
        assert fc.ipn_per_site(p) == pytest.approx(0.1)

    def test_all_zero_with_renormalize_rejected(self):
        with pytest.raises(ValueError, match="all-zero"):
            fc.ipn_per_site(np.zeros(5), renormalize=True)

    def test_negative_populations_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            fc.ipn_per_site(np.array([0.5, -0.5, 1.0]))

    @given(population_vectors)
    @settings(max_examples=200, deadline=None)
    def test_upper_bound(self, p):
        assert fc.ipn_per_site(p, renormalize=True) <= 1.0 + 1e-12


class TestIpnPerCell:
    def test_single_site_saturates_bound(self, caging_spec):
        p = np.zeros(49)
        p[30] = 1.0
        assert fc.ipn_per_cell(p, caging_spec) == 1.0

    def test_caged_state_at_half_period(self, caging_spec):
        # half the population in each of the two cells flanking the hub
        p = np.zeros(49)
        for n in (4, 5):
            for i in range(1, 6):
                p[fc.c_site(n, i, 5) - 1] = 0.1
        assert fc.ipn_per_cell(p, caging_spec) == pytest.approx(0.5)

    def test_uniform_spread(self, caging_spec):
        # eight 6-site cells plus the lone terminal hub
        p = np.full(49, 1.0 / 49.0)
        expected = 8 * (6.0 / 49.0) ** 2 + (1.0 / 49.0) ** 2
        assert fc.ipn_per_cell(p, caging_spec) == pytest.approx(expected)

    def test_wrong_length_rejected(self, caging_spec):
        with pytest.raises(ValueError, match="sites"):
            fc.ipn_per_cell(np.ones(10), caging_spec)

    def test_coarse_graining_dominates_per_site(self, caging_spec):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            p = rng.random(49)
            per_site = fc.ipn_per_site(p)
            per_cell = fc.ipn_per_cell(p, caging_spec)
            assert per_cell >= per_site - 1e-12
            assert per_cell <= 1.0 + 1e-12


class TestIpnOpenSystem:
    def test_fully_decayed_sink(self):
        d = np.zeros(50)
        d[49] = 1.0
        assert fc.ipn_open_system(d) == 1.0

    def test_zero_rate_matches_per_site(self, caging_spec):
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(caging_spec),
            center_excitation(caging_spec),
            fc.TimeGrid(5.0, 40),
        )
        with_sink = np.concatenate(
            [traj.populations, np.zeros((40, 1))], axis=1
        )
        assert_allclose(fc.ipn_open_system(with_sink),
                        fc.ipn_per_site(traj.populations, renormalize=False),
                        atol=1e-14)

    def test_uniform_decay_identity(self, caging_spec):
        # diag = (e^{-gt} p_u, 1-e^{-gt})  =>  IPN = e^{-2gt} IPN_u + (1-e^{-gt})^2
        gamma = 0.05
        grid = fc.TimeGrid(20.0, 120)
        h = fc.build_real_hamiltonian(caging_spec)
        traj = fc.uniform_decay_trajectory(h, gamma, center_excitation(caging_spec), grid)
        closed = fc.evolve_spectral(h, center_excitation(caging_spec), grid)
        env = np.exp(-gamma * grid.physical_times())
        expected = env ** 2 * fc.ipn_per_site(closed.populations) + (1.0 - env) ** 2
        assert_allclose(fc.ipn_open_system(traj.populations), expected, atol=1e-12)

    def test_broken_trace_rejected(self):
        with pytest.raises(ValueError, match="trace"):
            fc.ipn_open_system(np.full(50, 0.1))


class TestIpnSeries:
    def test_per_cell_needs_spec(self, caging_spec):
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(caging_spec),
            center_excitation(caging_spec),
            fc.TimeGrid(2.0, 10),
        )
        with pytest.raises(ValueError, match="spec"):
            fc.ipn_series(traj, definition="per_cell")
        series = fc.ipn_series(traj, definition="per_cell", spec=caging_spec)
        assert series.values.min() >= 0.5 - 1e-8

    def test_open_trajectory_rejects_per_cell(self, caging_spec):
        h = fc.build_real_hamiltonian(caging_spec)
        traj = fc.uniform_decay_trajectory(
            h, 0.05, center_excitation(caging_spec), fc.TimeGrid(2.0, 10)
        )
        with pytest.raises(ValueError, match="open-system"):
            fc.ipn_series(traj, definition="per_cell", spec=caging_spec)

    def test_unknown_options_rejected(self, caging_spec):
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(caging_spec),
            center_excitation(caging_spec),
            fc.TimeGrid(2.0, 10),
        )
        with pytest.raises(ValueError):
            fc.ipn_series(traj, definition="bogus")
        with pytest.raises(ValueError):
            fc.ipn_series(traj, normalization="bogus")

    def test_caging_oscillation_matches_closed_form(self, caging_spec):
        grid = fc.TimeGrid(150.0, 300)
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(caging_spec),
            center_excitation(caging_spec), grid,
        )
        series = fc.ipn_series(traj)
        expected = caging_ipn_closed_form(grid.times())
        assert_allclose(series.values, expected, atol=1e-8)
        # cos^4 + sin^4/10 ranges over [1/11, 1]: the minimum is uniform
        # spread over all 2N+1 sites of the cage, not the half-period value
        assert series.values.min() >= 1.0 / 11.0 - 1e-8
        assert series.values.max() <= 1.0 + 1e-9

    def test_renormalized_default_for_nonhermitian(self, caging_flux):
        spec = fc.LatticeSpec(cells=9, flux=caging_flux, gamma_nh=0.1)
        traj = fc.evolve_general(
            fc.build_real_hamiltonian(spec), center_excitation(spec),
            fc.TimeGrid(150.0, 300),
        )
        series = fc.ipn_series(traj)
        assert np.isfinite(series.values).all()
        assert series.values.max() <= 1.0 + 1e-9
        raw = fc.ipn_series(traj, normalization="raw")
        # raw values track the exploding norm and are only meaningful early
        assert raw.values[0] == pytest.approx(1.0)


class TestFluctuation:
    def test_constant_series(self):
        result = fc.fluctuation(np.full(300, 0.37))
        assert result.sigma == 0.0
        assert result.mean_ipn == pytest.approx(0.37)

    def test_two_sample_series(self):
        result = fc.fluctuation(np.array([0.0, 1.0]))
        assert result.mean_ipn == pytest.approx(0.5)
        assert result.sigma == pytest.approx(0.5)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError, match="2 samples"):
            fc.fluctuation(np.array([1.0]))

    def test_time_reversal_invariance(self):
        rng = np.random.default_rng(41)
        values = rng.random(257)
        fwd = fc.fluctuation(values)
        rev = fc.fluctuation(values[::-1])
        assert fwd.sigma == pytest.approx(rev.sigma, abs=1e-12)
        assert fwd.mean_ipn == pytest.approx(rev.mean_ipn, abs=1e-12)

    def test_accepts_ipn_series(self, caging_spec):
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(caging_spec),
            center_excitation(caging_spec),
            fc.TimeGrid(10.0, 50),
        )
        series = fc.ipn_series(traj)
        assert fc.fluctuation(series).sigma == fc.fluctuation(series.values).sigma

    def test_discrete_estimator_tracks_dense_quadrature(self):
        # 300 uniform samples of the caged oscillation stand in for the
        # window integrals; reference: 10^6-point uniform quadrature
        coarse = caging_ipn_closed_form(np.linspace(0.0, 150.0, 300))
        dense = caging_ipn_closed_form(np.linspace(0.0, 150.0, 10 ** 6))
        sigma_coarse = fc.fluctuation(coarse).sigma
        sigma_dense = fc.fluctuation(dense).sigma
        assert abs(sigma_coarse - sigma_dense) / sigma_dense < 0.02


class TestHeatmap:
    def test_first_row_is_one_hot(self, caging_spec):
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(caging_spec),
            center_excitation(caging_spec),
            fc.TimeGrid(2.0, 10),
        )
        matrix = fc.heatmap(traj)
        assert matrix[0, 24] == pytest.approx(1.0)
        assert matrix[0].sum() == pytest.approx(1.0)

    def test_caged_support_is_confined(self, caging_spec):
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(caging_spec),
            center_excitation(caging_spec),
            fc.TimeGrid(10.0, 100),
        )
        matrix = fc.heatmap(traj)
        outside = np.ones(49, bool)
        outside[19:30] = False  # global sites 20..30 hold the cage
        assert matrix[:, outside].max() < 1e-10

    def test_dispersive_run_reaches_the_edges(self, zero_flux_spec):
        traj = fc.evolve_spectral(
            fc.build_real_hamiltonian(zero_flux_spec),
            center_excitation(zero_flux_spec),
            fc.TimeGrid(10.0, 100),
        )
        matrix = fc.heatmap(traj)
        assert matrix[:, 0].max() > 1e-3
        assert matrix[:, 48].max() > 1e-3


class TestEnvelopeCrossing:
    def test_decaying_oscillation(self):
        t = np.linspace(0.0, 30.0, 3001)
        values = np.exp(-t / 10.0) * np.cos(4.0 * t) ** 2
        crossing = fc.envelope_crossing_time(t, values, 0.5, window=2.0)
        # envelope e^{-t/10} crosses 0.5 at t = 10 ln 2 = 6.93; the
        # forward-looking window fires up to one oscillation period early
        assert 6.0 < crossing <= 10.0 * math.log(2.0) + 0.02

    def test_never_crossing_returns_inf(self):
        t = np.linspace(0.0, 10.0, 101)
        assert fc.envelope_crossing_time(t, np.ones(101), 0.5, 1.0) == math.inf

    def test_bad_input_rejected(self):
        with pytest.raises(ValueError):
            fc.envelope_crossing_time(np.arange(5), np.arange(4), 0.5, 1.0)
