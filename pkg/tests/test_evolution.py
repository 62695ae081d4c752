from __future__ import annotations

import numpy as np
import pytest

from ensemblehydro import (BlowUpError, Constants, FieldState, GridSpec,
                           HamiltonianModel, HarmonicPotential, Metric,
                           RunParams, evolve_hydro, evolve_reference,
                           max_stable_dt, normalize, preset_scenario,
                           to_wavefunction)
from ensemblehydro.grids import ConfigurationError
from ensemblehydro.scenarios import coherent_state

from conftest import free_model, gaussian_state


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dt": 0.0, "t_final": 1.0},
        {"dt": -0.1, "t_final": 1.0},
        {"dt": 0.1, "t_final": -1.0},
        {"dt": 0.1, "t_final": 1.0, "snapshot_stride": 0},
        {"dt": 0.1, "t_final": 1.0, "integrator": "euler"},
        {"dt": 0.1, "t_final": 1.0, "stability_factor": 0.0},
    ],
)
def test_run_params_validation(kwargs):
    with pytest.raises(ConfigurationError):
        RunParams(**kwargs)


def test_max_stable_dt_oracle(grid64):
    # 0.2 dx^2 m / max(hbar, hbar_chi); at the quantum point hbar_chi = hbar
    quantum = max_stable_dt(grid64, Metric(masses=(1.0,)), Constants())
    assert quantum == pytest.approx(0.2 * 0.3125**2, rel=1e-12)
    classical = max_stable_dt(grid64, Metric(masses=(1.0,)), Constants(B=0.0))
    assert classical == quantum
    # B = hbar^2/2 makes hbar_chi = 2 and halves the admissible step
    stiff = max_stable_dt(grid64, Metric(masses=(1.0,)), Constants(B=0.5))
    assert stiff == pytest.approx(quantum / 2.0, rel=1e-12)


def test_guard_rejects_large_dt(grid64):
    st = gaussian_state(grid64)
    with pytest.raises(ConfigurationError):
        evolve_hydro(st, free_model(), RunParams(dt=0.05, t_final=0.1))


def test_classical_still_gaussian_is_a_fixed_point():
    sc = preset_scenario("free-classical-gaussian")
    run = RunParams(dt=0.8 * max_stable_dt(sc.grid, sc.metric, sc.constants), t_final=0.05)
    traj = evolve_hydro(sc.initial, sc.model(), run)
    fin = traj.final
    assert np.max(np.abs(fin.p - sc.initial.p)) < 1e-15
    assert np.max(np.abs(fin.s - sc.initial.s)) < 1e-15


def test_classical_uniform_flow_is_exact(grid64):
    # p uniform, S = 0, slope c: dS/dt = -A g c^2 is constant, p is static;
    # RK4 integrates a constant rate with zero error
    c = 2.0 * np.pi * 4.0 / 20.0
    p = np.full(grid64.shape, 0.05)
    st = FieldState(grid=grid64, p=p, s=np.zeros(grid64.shape), slope=(c,))
    traj = evolve_hydro(st, free_model(Constants(B=0.0)),
                        RunParams(dt=0.01, t_final=0.5))
    expected = -0.5 * 0.5 * c**2
    assert np.max(np.abs(traj.final.s - expected)) < 1e-14
    assert np.max(np.abs(traj.final.p - p)) == 0.0
    assert traj.final.slope == (c,)


def test_snapshot_plan_covers_remainder(grid64):
    st = gaussian_state(grid64)
    run = RunParams(dt=0.015, t_final=0.05, snapshot_stride=2)
    traj = evolve_hydro(st, free_model(), run)
    times = traj.times
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.05, abs=1e-12)
    assert len(traj.observables) == len(traj.snapshots)
    assert [round(t, 12) for t in times] == [0.0, 0.03, 0.05]


def test_zero_horizon_run(grid64):
    st = gaussian_state(grid64)
    traj = evolve_hydro(st, free_model(), RunParams(dt=0.01, t_final=0.0))
    assert len(traj.snapshots) == 1
    assert traj.final is traj.snapshots[0]
    assert traj.flags == []


def test_quantum_step_preserves_norm_and_energy():
    grid = GridSpec(points=(128,), lower=(-7.0,), upper=(7.0,))
    metric = Metric(masses=(1.0,))
    constants = Constants()
    st = coherent_state(grid, metric, constants, omega=1.0, displacement=1.0)
    model = HamiltonianModel(constants=constants, metric=metric,
                             potential=HarmonicPotential(spring=(1.0,), center=(0.0,)))
    dt = 0.8 * max_stable_dt(grid, metric, constants)
    traj = evolve_hydro(st, model, RunParams(dt=dt, t_final=0.5, snapshot_stride=50))
    norms = [r.norm for r in traj.observables]
    energies = [r.energy for r in traj.observables]
    assert max(abs(n - 1.0) for n in norms) < 1e-12
    assert max(abs(e - energies[0]) for e in energies) / abs(energies[0]) < 1e-9
    assert traj.flags == []


def test_interior_floor_contact_is_flagged(grid64):
    # a flat sub-floor plateau between two bright lobes is near-node
    # structure that one step of diffusion cannot lift above the floor
    x = grid64.mesh[0]
    p = np.exp(-2.0 * (x - 6.0) ** 2) + np.exp(-2.0 * (x + 6.0) ** 2) + 1e-14
    st = FieldState(grid=grid64, p=normalize(p, grid64), s=np.zeros(grid64.shape))
    run = RunParams(dt=0.5 * max_stable_dt(grid64, Metric(masses=(1.0,)), Constants()),
                    t_final=0.01)
    traj = evolve_hydro(st, free_model(), run)
    assert traj.flags
    assert "floor" in traj.flags[0]


def test_unstable_integrator_raises_blow_up(grid64):
    st = gaussian_state(grid64)
    model = free_model(filter_order=0)
    dt = 0.9 * max_stable_dt(grid64, Metric(masses=(1.0,)), Constants())
    # Heun amplifies every oscillatory mode; without the spectral filter the
    # Nyquist-adjacent tail detonates within a few hundred steps
    with pytest.raises(BlowUpError) as err:
        evolve_hydro(st, model, RunParams(dt=dt, t_final=12.0, integrator="heun"))
    assert err.value.step > 0
    assert err.value.time > 0.0
    assert err.value.partial.snapshots
    assert err.value.partial.observables


def test_reference_solver_is_unitary(grid64):
    wf = to_wavefunction(gaussian_state(grid64), Constants())
    traj = evolve_reference(wf, free_model(), RunParams(dt=0.02, t_final=0.5))
    norms = [s.norm() for s in traj.snapshots]
    assert max(abs(n - 1.0) for n in norms) < 1e-13


def test_reference_ground_state_rotates_at_its_energy():
    sc = preset_scenario("harmonic-ground")
    model = sc.model()
    wf0 = to_wavefunction(sc.initial, model.constants)
    traj = evolve_reference(wf0, model, RunParams(dt=0.002, t_final=0.5))
    expect = wf0.psi * np.exp(-1j * 0.5 * 0.5)  # E = hbar omega / 2
    assert np.max(np.abs(traj.snapshots[-1].psi - expect)) < 1e-6


def test_reference_solver_requires_the_quantum_point(grid64):
    wf = to_wavefunction(gaussian_state(grid64), Constants())
    with pytest.raises(ConfigurationError):
        evolve_reference(wf, free_model(Constants(B=0.0)),
                         RunParams(dt=0.02, t_final=0.1))
