"""Observable extraction and cross-state comparison metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import Constants, FieldState, Wavefunction, fidelity, to_wavefunction
from .grids import ConfigurationError
from .hamiltonian import HamiltonianModel, quantum_potential, total_hamiltonian


@dataclass(frozen=True)
class ObservableRecord:
    """Per-snapshot diagnostics: norm, energy, moments of p, max |Q|.

    Moments are plain Cartesian integrals, valid while the packet stays far
    from the periodic boundary (boundary density below ~1e-12).
    """

    time: float
    norm: float
    energy: float
    mean: tuple[float, ...]
    variance: tuple[float, ...]
    max_q: float


@dataclass(frozen=True)
class ComparisonRecord:
    time: float
    l2_density: float
    sup_density: float
    fidelity: float


def _moments(p: np.ndarray, grid) -> tuple[tuple[float, ...], tuple[float, ...]]:
    means = []
    variances = []
    for ax in range(grid.ndim):
        x = grid.mesh[ax]
        m = grid.integrate(p * x)
        v = grid.integrate(p * x * x) - m * m
        means.append(m)
        variances.append(v)
    return tuple(means), tuple(variances)


def _max_q(p: np.ndarray, q: np.ndarray) -> float:
    # Q is only meaningful where the density carries weight; nine decades
    # below the peak covers every resolved feature and excludes vacuum cells
    live = p > 1e-9 * p.max()
    if not live.any():
        return 0.0
    return float(np.max(np.abs(q[live])))


def observables(state: FieldState, model: HamiltonianModel) -> ObservableRecord:
    # Q is evaluated on the floor-clamped density: evolved vacuum tails sit
    # far below the floor (classically even round-off negative), and the gate
    # above discards those cells anyway
    floor = model.numerics.density_floor
    diag = state.with_fields(p=np.maximum(state.p, floor))
    mean, var = _moments(state.p, state.grid)
    q = quantum_potential(diag, model)
    return ObservableRecord(
        time=state.time,
        norm=state.norm(),
        energy=total_hamiltonian(state, model),
        mean=mean,
        variance=var,
        max_q=_max_q(state.p, q),
    )


def observables_reference(wf: Wavefunction, model: HamiltonianModel) -> ObservableRecord:
    """The same record for a wavefunction snapshot.

    Energy is the spectral expectation of the kinetic operator plus the
    potential average; max |Q| is evaluated on the floor-clamped density so
    underflowed tails cannot masquerade as nodes.
    """
    grid = wf.grid
    p = wf.density()
    mean, var = _moments(p, grid)

    c = model.constants
    psi_hat = np.fft.fftn(wf.psi)
    ksq = np.zeros(grid.shape)
    for ax in range(grid.ndim):
        k = grid.wavenumbers(ax)
        shape = [1] * grid.ndim
        shape[ax] = grid.points[ax]
        ksq = ksq + k.reshape(shape) ** 2 / model.metric.mass_of_axis(ax)
    n_total = float(np.prod(grid.shape))
    kinetic = 0.5 * c.hbar ** 2 * np.sum(ksq * np.abs(psi_hat) ** 2) * grid.cell_volume / n_total
    v = model.potential.evaluate(grid)
    energy = float(kinetic + grid.integrate(v * p))

    floor = model.numerics.density_floor
    diag = FieldState(grid=grid, p=np.maximum(p, floor), s=np.zeros(grid.shape), time=wf.time)
    q = quantum_potential(diag, model)
    return ObservableRecord(time=wf.time, norm=grid.integrate(p), energy=energy,
                            mean=mean, variance=var, max_q=_max_q(p, q))


def compare_states(a: FieldState, b: FieldState, constants: Constants) -> ComparisonRecord:
    if a.grid != b.grid:
        raise ConfigurationError("states to compare must share a grid")
    diff = a.p - b.p
    return ComparisonRecord(
        time=a.time,
        l2_density=a.grid.l2_norm(diff),
        sup_density=float(np.max(np.abs(diff))),
        fidelity=fidelity(to_wavefunction(a, constants), to_wavefunction(b, constants)),
    )


def compare_with_reference(state: FieldState, wf: Wavefunction,
                           constants: Constants) -> ComparisonRecord:
    """Hydrodynamic state against a reference wavefunction at equal times."""
    if state.grid != wf.grid:
        raise ConfigurationError("states to compare must share a grid")
    diff = state.p - wf.density()
    return ComparisonRecord(
        time=state.time,
        l2_density=state.grid.l2_norm(diff),
        sup_density=float(np.max(np.abs(diff))),
        fidelity=fidelity(to_wavefunction(state, constants), wf),
    )


def free_gaussian_width(t: float, sigma0: float, m: float, hbar: float) -> float:
    """Width sigma(t) of a freely spreading Gaussian that starts at rest."""
    if sigma0 <= 0:
        raise ConfigurationError("sigma0 must be positive")
    rate = hbar * t / (2.0 * m * sigma0 * sigma0)
    return sigma0 * math.sqrt(1.0 + rate * rate)
