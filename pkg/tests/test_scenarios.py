from __future__ import annotations

import numpy as np
import pytest

from ensemblehydro import (Constants, GridSpec, Metric, observables,
                           preset_names, preset_scenario, to_wavefunction,
                           total_hamiltonian)
from ensemblehydro.grids import ConfigurationError
from ensemblehydro.scenarios import coherent_state, gaussian_packet

NAMES = [
    "boosted-gaussian",
    "free-classical-gaussian",
    "free-quantum-gaussian",
    "harmonic-coherent",
    "harmonic-ground",
    "two-particle-separable",
]


def test_preset_names_are_sorted_and_complete():
    assert preset_names() == NAMES


@pytest.mark.parametrize("name", NAMES)
def test_presets_build_valid_states(name):
    sc = preset_scenario(name)
    st = sc.initial
    assert st.norm() == pytest.approx(1.0, abs=1e-12)
    assert st.min_density() > 0.0
    assert sc.default_t_final > 0.0
    # every preset state must admit the wavefunction representation
    to_wavefunction(st, sc.constants)
    model = sc.model()
    assert np.isfinite(total_hamiltonian(st, model))


def test_default_horizons():
    assert preset_scenario("free-quantum-gaussian").default_t_final == 2.0
    assert preset_scenario("harmonic-coherent").default_t_final == pytest.approx(2.0 * np.pi)
    assert preset_scenario("two-particle-separable").default_t_final == 1.0


def test_unknown_preset():
    with pytest.raises(ConfigurationError) as err:
        preset_scenario("harmonic")
    assert "available" in str(err.value)


def test_free_presets_differ_only_in_B():
    q = preset_scenario("free-quantum-gaussian")
    c = preset_scenario("free-classical-gaussian")
    assert q.constants.B == 0.125
    assert c.constants.B == 0.0
    assert np.array_equal(q.initial.p, c.initial.p)


def test_coherent_width_tracks_constants():
    sc = preset_scenario("harmonic-coherent")
    rec = observables(sc.initial, sc.model())
    # sigma^2 = hbar / (2 m omega) = 1/2
    assert rec.variance[0] == pytest.approx(0.5, rel=1e-9)
    assert rec.mean[0] == pytest.approx(1.0, rel=1e-9)

    narrow = preset_scenario("harmonic-coherent", constants=Constants(hbar=0.5))
    rec2 = observables(narrow.initial, narrow.model())
    assert rec2.variance[0] == pytest.approx(0.25, rel=1e-9)
    assert narrow.constants.B == 0.03125

    # an override that no longer fits the preset box is rejected outright
    with pytest.raises(ConfigurationError):
        preset_scenario("harmonic-coherent", constants=Constants(hbar=2.0))


def test_two_particle_tensor_shape():
    sc = preset_scenario("two-particle-separable")
    assert sc.grid.ndim == 2
    assert sc.metric.masses == (1.0, 2.0)
    assert sc.initial.p.shape == sc.grid.shape


def test_boosted_preset_winds_whole_turns():
    sc = preset_scenario("boosted-gaussian")
    (c,) = sc.initial.slope
    turns = c * sc.grid.lengths[0] / (2.0 * np.pi * sc.constants.hbar)
    assert turns == pytest.approx(round(turns), abs=1e-12)
    assert turns != 0


def test_gaussian_packet_rejects_boundary_overlap():
    grid = GridSpec(points=(64,), lower=(-10.0,), upper=(10.0,))
    metric = Metric(masses=(1.0,))
    with pytest.raises(ConfigurationError) as err:
        gaussian_packet(grid, metric, Constants(), mu=[0.0], sigma=[5.0])
    assert "boundary" in str(err.value).lower()
    with pytest.raises(ConfigurationError):
        gaussian_packet(grid, metric, Constants(), mu=[0.0], sigma=[-1.0])
    with pytest.raises(ConfigurationError):
        gaussian_packet(grid, metric, Constants(), mu=[0.0, 0.0], sigma=[1.0])


def test_gaussian_packet_velocity_rides_the_slope_channel():
    grid = GridSpec(points=(64,), lower=(-10.0,), upper=(10.0,))
    metric = Metric(masses=(2.0,))
    # the slope is m k, so the initial velocity field g dS is exactly k
    st = gaussian_packet(grid, metric, Constants(), mu=[0.0], sigma=[1.0],
                         k=[2.0 * np.pi * 3.0 / 20.0])
    assert st.slope[0] == pytest.approx(2.0 * 2.0 * np.pi * 3.0 / 20.0)
    to_wavefunction(st, Constants())  # whole turns: representable
    broken = gaussian_packet(grid, metric, Constants(), mu=[0.0], sigma=[1.0], k=[0.1])
    with pytest.raises(ConfigurationError):
        to_wavefunction(broken, Constants())


def test_coherent_state_is_one_dimensional():
    grid = GridSpec(points=(16, 16), lower=(-7.0, -7.0), upper=(7.0, 7.0))
    with pytest.raises(ConfigurationError):
        coherent_state(grid, Metric(masses=(1.0, 1.0)), Constants(),
                       omega=1.0, displacement=1.0)
