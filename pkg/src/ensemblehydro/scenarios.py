"""Preset initial conditions with known behavior.

Every preset keeps its packet far enough from the periodic boundary that
Cartesian moments are valid and (where noted) the density stays above the
division floor for the whole intended run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import Constants, FieldState, Metric, normalize
from .grids import ConfigurationError, GridSpec
from .hamiltonian import HamiltonianModel, NumericsPolicy
from .potentials import FreePotential, HarmonicPotential, Potential

BOUNDARY_TAIL_LIMIT = 1e-12


def _boundary_max(p: np.ndarray) -> float:
    # first and last samples per axis: the wrap seam where periodicity bites
    worst = 0.0
    for ax in range(p.ndim):
        worst = max(worst, float(np.take(p, 0, axis=ax).max()),
                    float(np.take(p, -1, axis=ax).max()))
    return worst


def gaussian_packet(grid: GridSpec, metric: Metric, constants: Constants,
                    mu: list[float], sigma: list[float],
                    k: list[float] | None = None) -> FieldState:
    """Normalized Gaussian density with a linear action profile.

    The action is S = sum_ax m_ax k_ax x_ax, carried entirely by the state's
    slope, so the initial velocity field g dS is exactly k.
    """
    if k is None:
        k = [0.0] * grid.ndim
    if not (len(mu) == len(sigma) == len(k) == grid.ndim):
        raise ConfigurationError("mu, sigma, k must each have one entry per grid axis")
    if any(s <= 0 for s in sigma):
        raise ConfigurationError("sigma must be positive")

    logp = np.zeros(grid.shape)
    for ax in range(grid.ndim):
        logp = logp - (grid.mesh[ax] - mu[ax]) ** 2 / (2.0 * sigma[ax] ** 2)
    p = normalize(np.exp(logp), grid)
    worst = _boundary_max(p)
    if worst > BOUNDARY_TAIL_LIMIT:
        raise ConfigurationError(
            f"boundary density {worst:.2e} exceeds {BOUNDARY_TAIL_LIMIT:.0e}; "
            "the box is too small for the requested packet"
        )
    slope = tuple(metric.mass_of_axis(ax) * k[ax] for ax in range(grid.ndim))
    return FieldState(grid=grid, p=p, s=np.zeros(grid.shape), slope=slope)


def coherent_state(grid: GridSpec, metric: Metric, constants: Constants,
                   omega: float, displacement: float) -> FieldState:
    """Displaced harmonic ground state: sigma^2 = hbar/(2 m omega), S = 0.

    Under the matching harmonic trap its density oscillates rigidly with
    period 2 pi / omega.
    """
    if grid.ndim != 1:
        raise ConfigurationError("coherent_state is a 1D preset")
    if omega <= 0:
        raise ConfigurationError("omega must be positive")
    m = metric.mass_of_axis(0)
    sigma = math.sqrt(constants.hbar / (2.0 * m * omega))
    return gaussian_packet(grid, metric, constants, mu=[displacement], sigma=[sigma])


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: GridSpec
    metric: Metric
    constants: Constants
    potential: Potential
    initial: FieldState
    default_t_final: float = 2.0

    def model(self, numerics: NumericsPolicy = NumericsPolicy()) -> HamiltonianModel:
        return HamiltonianModel(constants=self.constants, metric=self.metric,
                                potential=self.potential, numerics=numerics)


def _free_gaussian(name: str, B: float | None, con: Constants | None) -> Scenario:
    grid = GridSpec(points=(512,), lower=(-20.0,), upper=(20.0,))
    metric = Metric(masses=(1.0,))
    constants = con if con is not None else Constants(hbar=1.0, A=0.5, B=B)
    initial = gaussian_packet(grid, metric, constants, mu=[0.0], sigma=[1.0])
    return Scenario(name, grid, metric, constants, FreePotential(), initial,
                    default_t_final=2.0)


def _harmonic(name: str, displacement: float, con: Constants | None) -> Scenario:
    grid = GridSpec(points=(256,), lower=(-7.0,), upper=(7.0,))
    metric = Metric(masses=(1.0,))
    constants = con if con is not None else Constants(hbar=1.0, A=0.5)
    initial = coherent_state(grid, metric, constants, omega=1.0, displacement=displacement)
    return Scenario(name, grid, metric, constants,
                    HarmonicPotential(spring=(1.0,)), initial,
                    default_t_final=2.0 * math.pi)


def _two_particle(con: Constants | None) -> Scenario:
    grid = GridSpec(points=(128, 128), lower=(-10.0, -10.0), upper=(10.0, 10.0))
    metric = Metric(masses=(1.0, 2.0))
    constants = con if con is not None else Constants(hbar=1.0, A=0.5)
    initial = gaussian_packet(grid, metric, constants,
                              mu=[0.0, 0.0], sigma=[1.0, 1.0])
    return Scenario("two-particle-separable", grid, metric, constants,
                    FreePotential(), initial, default_t_final=1.0)


def _boosted(con: Constants | None) -> Scenario:
    grid = GridSpec(points=(512,), lower=(-20.0,), upper=(20.0,))
    metric = Metric(masses=(1.0,))
    constants = con if con is not None else Constants(hbar=1.0, A=0.5)
    # velocity with a whole number of phase windings around the box; the
    # horizon puts the packet a whole number of cells downstream
    v = 4 * 2.0 * math.pi * constants.hbar / (metric.masses[0] * 40.0)
    initial = gaussian_packet(grid, metric, constants, mu=[0.0], sigma=[1.0], k=[v])
    return Scenario("boosted-gaussian", grid, metric, constants, FreePotential(),
                    initial, default_t_final=8 * grid.spacings[0] / v)


_PRESETS = {
    "free-quantum-gaussian": lambda con: _free_gaussian("free-quantum-gaussian", None, con),
    "free-classical-gaussian": lambda con: _free_gaussian("free-classical-gaussian", 0.0, con),
    "harmonic-ground": lambda con: _harmonic("harmonic-ground", 0.0, con),
    "harmonic-coherent": lambda con: _harmonic("harmonic-coherent", 1.0, con),
    "two-particle-separable": _two_particle,
    "boosted-gaussian": _boosted,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset_scenario(name: str, constants: Constants | None = None) -> Scenario:
    """Look up a preset, optionally overriding its physical constants.

    Overridden constants rebuild the initial state, so a coherent state keeps
    sigma^2 = hbar / (2 m omega) under a changed hbar.
    """
    try:
        build = _PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown scenario {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return build(constants)
