from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemblehydro import (Constants, GridSpec, RunParams, check_galilean_boost,
                           check_scale_invariance, check_uniform_minimum,
                           preset_scenario, random_nodeless_state, run_axiom_suite)
from ensemblehydro.axioms import check_positivity, check_separability
from ensemblehydro.grids import ConfigurationError

from conftest import free_model

GRID = GridSpec(points=(256,), lower=(-10.0,), upper=(10.0,))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_random_nodeless_states_are_valid(seed):
    st0 = random_nodeless_state(GRID, np.random.default_rng(seed))
    assert st0.min_density() > 0.0
    assert st0.norm() == pytest.approx(1.0, abs=1e-12)
    assert st0.slope == (0.0,)


def test_suite_passes_with_defaults():
    reports = run_axiom_suite(seed=0)
    assert [r.name for r in reports] == [
        "scale-invariance",
        "positivity",
        "separability",
        "galilean-boost",
        "uniform-minimum",
    ]
    assert all(r.passed for r in reports)
    by_name = {r.name: r for r in reports}
    assert by_name["scale-invariance"].deviation < 1e-13
    assert by_name["separability"].deviation < 1e-7
    assert by_name["galilean-boost"].deviation < 1e-5
    # the uniform minimum margin is signed: best sample stays above uniform
    assert by_name["uniform-minimum"].deviation <= 0.0


def test_scale_control_fails():
    st0 = random_nodeless_state(GRID, np.random.default_rng(0))
    report = check_scale_invariance(st0, free_model(), control="gradient-squared")
    assert not report.passed
    assert report.deviation > 1e-3


def test_positivity_needs_a_bounded_potential():
    with pytest.raises(ConfigurationError):
        Constants(B=-1.0)  # a negative-B model cannot even be written down
    report = check_positivity(GRID, free_model(), trials=10, seed=1)
    assert report.passed


def test_separability_control_fails():
    a = preset_scenario("two-particle-separable")
    # reuse the preset's factors via two one-particle scenarios
    ga = GridSpec(points=(128,), lower=(-10.0,), upper=(10.0,))
    from ensemblehydro import FreePotential, Metric, Scenario
    from ensemblehydro.scenarios import gaussian_packet

    def factor(name, mass):
        metric = Metric(masses=(mass,))
        c = Constants()
        return Scenario(name, ga, metric, c, FreePotential(),
                        gaussian_packet(ga, metric, c, mu=[0.0], sigma=[1.0]))

    run = RunParams(dt=0.0005, t_final=0.05)
    clean = check_separability(factor("a", 1.0), factor("b", 2.0), run)
    assert clean.passed
    coupled = check_separability(factor("a", 1.0), factor("b", 2.0), run,
                                 control="couple")
    assert not coupled.passed


def test_boost_control_fails():
    sc = preset_scenario("boosted-gaussian")
    v = sc.initial.slope[0] / sc.metric.masses[0]
    dx = sc.grid.spacings[0]
    run = RunParams(dt=0.0011, t_final=4 * dx / v, snapshot_stride=100)
    broken = check_galilean_boost(sc, v, run, control="drop-energy-phase")
    assert not broken.passed


def test_boost_requires_free_potential():
    sc = preset_scenario("harmonic-coherent")
    with pytest.raises(ConfigurationError):
        check_galilean_boost(sc, 0.5, RunParams(dt=0.0001, t_final=0.001))


def test_uniform_minimum_control_fails():
    report = check_uniform_minimum(GRID, free_model(), trials=20, seed=2,
                                   control="with-potential")
    assert not report.passed
    assert report.deviation > 0.0
