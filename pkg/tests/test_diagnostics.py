from __future__ import annotations

import numpy as np
import pytest

from ensemblehydro import (Constants, FieldState, GridSpec, compare_states,
                           compare_with_reference, free_gaussian_width,
                           observables, observables_reference, to_wavefunction)
from ensemblehydro.grids import ConfigurationError

from conftest import free_model, gaussian_state


def test_uniform_density_moments(grid64):
    st = FieldState(grid=grid64, p=np.full(grid64.shape, 0.05),
                    s=np.zeros(grid64.shape))
    rec = observables(st, free_model(Constants(B=0.0)))
    assert rec.norm == pytest.approx(1.0, abs=1e-14)
    # cell centers sample [-10, 10): the mean sits half a cell left of zero
    assert rec.mean[0] == pytest.approx(-0.3125 / 2.0, abs=1e-12)
    assert rec.variance[0] == pytest.approx(33.3251953125, rel=1e-12)  # ~ L^2/12
    assert rec.energy == 0.0
    assert rec.max_q == 0.0


def test_gaussian_moments(grid512):
    rec = observables(gaussian_state(grid512), free_model())
    assert rec.mean[0] == pytest.approx(0.0, abs=1e-12)
    assert rec.variance[0] == pytest.approx(1.0, rel=1e-9)
    assert rec.energy == pytest.approx(0.125, rel=1e-9)


def test_max_q_is_gated_to_the_bright_region(grid512):
    # Q of a unit Gaussian grows like x^2/4 into the vacuum; the recorded
    # maximum must come from cells that carry density, not from the tails
    rec = observables(gaussian_state(grid512), free_model())
    # gate at p > 1e-9 p_max: x^2 < 2 ln 1e9, so Q < (2 ln 1e9 / 4 - 1/2)
    bound = 2.0 * np.log(1e9) / 4.0
    assert 2.0 < rec.max_q < bound
    assert rec.max_q == pytest.approx(4.879856322351375, rel=1e-12)


def test_free_gaussian_width():
    assert free_gaussian_width(0.0, 1.0, 1.0, 1.0) == 1.0
    assert free_gaussian_width(2.0, 1.0, 1.0, 1.0) == pytest.approx(np.sqrt(2.0), rel=1e-15)
    # wider packets spread more slowly
    assert free_gaussian_width(2.0, 2.0, 1.0, 1.0) < 2.0 * np.sqrt(2.0)
    with pytest.raises(ConfigurationError):
        free_gaussian_width(1.0, 0.0, 1.0, 1.0)


def test_compare_states_and_reference(grid64):
    st = gaussian_state(grid64)
    c = Constants()
    rec = compare_states(st, st, c)
    assert rec.l2_density == 0.0 and rec.sup_density == 0.0
    assert rec.fidelity == pytest.approx(1.0, abs=1e-13)
    ref = compare_with_reference(st, to_wavefunction(st, c), c)
    assert ref.l2_density < 1e-15
    assert ref.fidelity == pytest.approx(1.0, abs=1e-13)


def test_compare_needs_shared_grid(grid64, grid512):
    with pytest.raises(ConfigurationError):
        compare_states(gaussian_state(grid64), gaussian_state(grid512), Constants())


def test_reference_observables_match_hydro(grid512):
    st = gaussian_state(grid512)
    model = free_model()
    a = observables(st, model)
    b = observables_reference(to_wavefunction(st, model.constants), model)
    assert b.norm == pytest.approx(a.norm, rel=1e-12)
    assert b.energy == pytest.approx(a.energy, rel=1e-6)
    assert b.variance[0] == pytest.approx(a.variance[0], rel=1e-12)
