"""The (density, action) field pair, the wavefunction view, and the maps between them.

A state is the real pair (p, S) on a periodic grid.  Because a linear-in-x
piece of S is not representable as a periodic grid field, S is stored as a
periodic part plus an explicit per-axis slope:

    S_total(x) = S_grid(x) + sum_k slope[k] * x_k

The slope carries the phase winding of travelling states; it is zero for
everything at rest.  The wavefunction view psi = sqrt(p) exp(i S_total / hbar)
is single valued only when slope[k] * L_k / hbar is a multiple of 2 pi, which
is checked on conversion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grids import ConfigurationError, GridSpec

NORMALIZATION_TOL = 1e-9
DEFAULT_DENSITY_FLOOR = 1e-12


class InvalidDensityError(ValueError):
    """Density is negative somewhere or carries no probability at all."""


class NodeError(ValueError):
    """Density fell to (or below) the floor where a nodeless state was required."""

    def __init__(self, message: str, location: tuple[int, ...] | None = None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class Metric:
    """Diagonal configuration-space metric: entry 1/m for each axis.

    `masses` lists one mass per particle; each particle contributes
    `dims_per_particle` consecutive grid axes.
    """

    masses: tuple[float, ...]
    dims_per_particle: int = 1

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if self.dims_per_particle < 1:
            raise ConfigurationError("dims_per_particle must be >= 1")
        if not self.masses or any(m <= 0 for m in self.masses):
            raise ConfigurationError("all particle masses must be strictly positive")

    @property
    def total_dims(self) -> int:
        return len(self.masses) * self.dims_per_particle

    def mass_of_axis(self, axis: int) -> float:
        return self.masses[axis // self.dims_per_particle]

    def inverse_mass_per_axis(self) -> np.ndarray:
        """The diagonal metric entries, one per flattened configuration axis."""
        return np.array([1.0 / self.mass_of_axis(i) for i in range(self.total_dims)])


@dataclass(frozen=True)
class Constants:
    """Kinetic coefficient A, log-density coefficient B, and hbar.

    A multiplies (dS)^2 in the Hamiltonian density and is 1/2 by default so
    that the evolution of p is the familiar continuity equation.  B has units
    of action squared: B = 0 is the classical ensemble, B = hbar^2/8 the
    quantum point.  B defaults to the quantum value.
    """

    hbar: float = 1.0
    A: float = 0.5
    B: float | None = None

    def __post_init__(self):
        if self.B is None:
            object.__setattr__(self, "B", self.hbar ** 2 / 8.0)
        object.__setattr__(self, "hbar", float(self.hbar))
        object.__setattr__(self, "A", float(self.A))
        object.__setattr__(self, "B", float(self.B))
        if self.hbar <= 0:
            raise ConfigurationError("hbar must be strictly positive")
        if self.A < 0 or self.B < 0:
            raise ConfigurationError("A and B must be non-negative")

    @property
    def quantum_B(self) -> float:
        """The B value at which the pair equations match the linear wave equation."""
        return self.hbar ** 2 / 8.0

    def is_quantum_point(self, rtol: float = 1e-12) -> bool:
        return math.isclose(self.A, 0.5, rel_tol=rtol) and math.isclose(
            self.B, self.quantum_B, rel_tol=rtol
        )


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FieldState:
    """Immutable (p, S) pair on a grid at one instant."""

    grid: GridSpec
    p: np.ndarray
    s: np.ndarray
    time: float = 0.0
    slope: tuple[float, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.p.shape != self.grid.shape or self.s.shape != self.grid.shape:
            raise ConfigurationError("p and S must both live on the grid")
        if not self.slope:
            object.__setattr__(self, "slope", (0.0,) * self.grid.ndim)
        elif len(self.slope) != self.grid.ndim:
            raise ConfigurationError("slope needs one entry per grid axis")
        object.__setattr__(self, "p", _freeze(np.asarray(self.p, dtype=float)))
        object.__setattr__(self, "s", _freeze(np.asarray(self.s, dtype=float)))

    def s_total(self) -> np.ndarray:
        """S including the linear winding part, on the grid's coordinate patch."""
        out = np.array(self.s)
        for k, c in enumerate(self.slope):
            if c != 0.0:
                out += c * self.grid.mesh[k]
        return out

    def norm(self) -> float:
        return self.grid.integrate(self.p)

    def min_density(self) -> float:
        return float(self.p.min())

    def with_fields(self, p: np.ndarray | None = None, s: np.ndarray | None = None,
                    time: float | None = None, slope: tuple[float, ...] | None = None) -> "FieldState":
        return FieldState(
            grid=self.grid,
            p=self.p if p is None else p,
            s=self.s if s is None else s,
            time=self.time if time is None else time,
            slope=self.slope if slope is None else slope,
        )


@dataclass(frozen=True)
class Wavefunction:
    """Complex field on the same grids, the cross-validation representation."""

    grid: GridSpec
    psi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.psi.shape != self.grid.shape:
            raise ConfigurationError("psi must live on the grid")
        object.__setattr__(self, "psi", _freeze(np.asarray(self.psi, dtype=complex)))

    def norm(self) -> float:
        return self.grid.integrate(np.abs(self.psi) ** 2)

    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2


def normalize(p: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Rescale a non-negative density so it integrates to one."""
    p = np.asarray(p, dtype=float)
    if p.min() < 0:
        raise InvalidDensityError(f"density has negative values (min {p.min():.3e})")
    total = grid.integrate(p)
    if total <= 0:
        raise InvalidDensityError("density integrates to zero")
    return p / total


def check_winding_consistency(grid: GridSpec, slope: tuple[float, ...], hbar: float,
                              tol: float = 1e-9) -> None:
    """A slope is representable as a single-valued phase only if it winds by 2*pi*n."""
    for k, c in enumerate(slope):
        turns = c * grid.lengths[k] / (2.0 * np.pi * hbar)
        if abs(turns - round(turns)) > tol:
            raise ConfigurationError(
                f"axis {k}: slope {c} winds {turns:.6f} turns around the box; "
                "an integer count is required for a single-valued phase"
            )


def to_wavefunction(state: FieldState, constants: Constants) -> Wavefunction:
    """psi = sqrt(p) * exp(i S_total / hbar)."""
    check_winding_consistency(state.grid, state.slope, constants.hbar)
    amp = np.sqrt(np.maximum(state.p, 0.0))
    psi = amp * np.exp(1j * state.s_total() / constants.hbar)
    return Wavefunction(grid=state.grid, psi=psi, time=state.time)


def _loop_winding(psi: np.ndarray, axis: int) -> int:
    """Net phase turns accumulated around the periodic loop along `axis`."""
    step = np.angle(np.roll(psi, -1, axis=axis) * np.conj(psi))
    total = step.sum(axis=axis)
    turns = np.round(total / (2.0 * np.pi)).astype(int)
    first = int(turns.flat[0])
    if np.any(turns != first):
        raise NodeError(f"phase winding along axis {axis} is not uniform; state has structure "
                        "too close to a node for a consistent action field")
    return first


def from_wavefunction(wf: Wavefunction, constants: Constants,
                      density_floor: float = DEFAULT_DENSITY_FLOOR,
                      jump_warn_fraction: float = 0.9) -> FieldState:
    """Recover (p, S) from psi: p = |psi|^2, S = hbar * unwrapped phase.

    The phase is unwrapped along each axis in turn; a winding part is split
    off into the state's slope so the stored S is continuous and periodic.
    S at the grid origin is anchored to the principal-value phase there.

    Raises NodeError when |psi|^2 dips to the density floor.  Adjacent-point
    phase jumps near pi are recorded as unwrap-ambiguity warnings on the
    returned state.
    """
    p = wf.density()
    if p.min() <= density_floor:
        loc = tuple(int(i) for i in np.unravel_index(int(np.argmin(p)), p.shape))
        coords = tuple(float(wf.grid.axis_coords(k)[i]) for k, i in enumerate(loc))
        raise NodeError(
            f"density {p.min():.3e} at grid index {loc} (x = {coords}) is at or below "
            f"the floor {density_floor:.1e}; the phase is not recoverable there",
            location=loc,
        )

    warnings: list[str] = []
    grid = wf.grid
    slope = []
    psi = np.array(wf.psi)
    for ax in range(grid.ndim):
        w = _loop_winding(psi, ax)
        c = 2.0 * np.pi * constants.hbar * w / grid.lengths[ax]
        slope.append(c)
        if w:
            psi = psi * np.exp(-1j * c * grid.mesh[ax] / constants.hbar)

    phase = np.angle(psi)
    for ax in range(grid.ndim):
        jump = np.abs(np.diff(phase, axis=ax))
        jump = np.minimum(jump, 2.0 * np.pi - jump)
        worst = float(jump.max()) if jump.size else 0.0
        if worst > jump_warn_fraction * np.pi:
            warnings.append(
                f"axis {ax}: adjacent phase jump {worst:.3f} rad is close to pi; "
                "unwrapping may be ambiguous"
            )
    for ax in range(grid.ndim):
        phase = np.unwrap(phase, axis=ax)

    origin_phase = float(np.angle(psi[(0,) * grid.ndim]))
    phase = phase - phase[(0,) * grid.ndim] + origin_phase
    s = constants.hbar * phase
    return FieldState(grid=grid, p=p, s=s, time=wf.time,
                      slope=tuple(slope), warnings=tuple(warnings))


def fidelity(a: Wavefunction, b: Wavefunction) -> float:
    """|<a, b>| on the shared grid."""
    if a.grid != b.grid:
        raise ConfigurationError("fidelity needs a shared grid")
    overlap = complex(np.sum(np.conj(a.psi) * b.psi)) * a.grid.cell_volume
    return abs(overlap)
