"""Time integration: explicit RK4/Heun for the ensemble fields, Strang splitting for psi.

The hydrodynamic integrator covers the parameter family through two routes.

At B = 0 the phase equation contains no density term, so the coupled system
is stepped directly in (p, S) with the contract forms continuity_rhs and
hjb_rhs.  Nothing divides by p on that route, so vacuum tails need no
clamping and may carry harmless round-off.

At B > 0 the same equations of motion are stepped through the complexified
amplitude chi = sqrt(p) exp(i S / b) with b = sqrt(4 B / A), the change of
variables under which the system is exactly a linear wave equation with
effective Planck constant b and masses m / 2A.  Stepping bare (p, S) on a
grid is not an option there: linearized about the steep tail of a localized
state, density and phase perturbations couple through an operator that is
self-adjoint only under the weight sqrt(p), so discretization defects of any
backend are amplified by the tail's full dynamic range as they advect inward
(measured growth rates scale like |d ln p| / dx and detonate every clamped,
masked, filtered, and compact-stencil variant well before t = 1).  chi is
the similarity variable that makes the discrete system normal: the identical
physics steps stably with no floor and no clamping, and tails carry only
inert absolute round-off.  Each step reconstructs p = |chi|^2 exactly and
rebuilds S from the spatially unwrapped phase of chi, branch-anchored to the
per-step increment at the densest cell (unambiguous: at any guarded step
size that increment stays well inside (-pi, pi)).  Anchoring matters: a tail
cell whose amplitude spends time at the round-off junk level has no usable
branch of its own, and accumulating its per-cell increments would leave a
fossil 2 pi offset behind once it re-emerges.

The reference path multiplies by exact kinetic and potential phases and
shares no stepping code with either route; agreement between the two solvers
is the central cross-check of the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .diagnostics import ObservableRecord, observables, observables_reference
from .fields import Constants, FieldState, Metric, Wavefunction
from .grids import ConfigurationError, GridSpec, derivative_backend
from .hamiltonian import HamiltonianModel, continuity_rhs, hjb_rhs

DEFAULT_STABILITY_FACTOR = 0.2


@dataclass(frozen=True)
class RunParams:
    """Step size, horizon, snapshot cadence, and integrator choice.

    The stability guard dt <= stability_factor * min(dx)^2 * m_min / hbar
    keeps the fastest grid mode well inside the RK4 imaginary-axis stability
    region.  Heun is only marginally stable there and needs a stability_factor
    of about 0.05 or less for long runs.
    """

    dt: float
    t_final: float
    snapshot_stride: int = 10
    integrator: str = "rk4"
    stability_factor: float = DEFAULT_STABILITY_FACTOR

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if self.t_final < 0:
            raise ConfigurationError("t_final must be non-negative")
        if self.snapshot_stride < 1:
            raise ConfigurationError("snapshot_stride must be >= 1")
        if self.integrator not in ("rk4", "heun"):
            raise ConfigurationError(f"unknown integrator {self.integrator!r}")
        if self.stability_factor <= 0:
            raise ConfigurationError("stability_factor must be positive")


@dataclass
class Trajectory:
    """Snapshots at stride boundaries (first = initial, last = final time).

    flags carries run-level warnings, e.g. the density reaching the floor
    inside the bright region: such runs are reported rather than trusted,
    since near-node dynamics is out of scope.
    """

    snapshots: list
    observables: list[ObservableRecord]
    flags: list[str] = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [s.time for s in self.snapshots]

    @property
    def final(self):
        return self.snapshots[-1]


class BlowUpError(RuntimeError):
    """Integration produced non-finite fields or lost mass; carries the partial run."""

    def __init__(self, message: str, step: int, time: float, partial: Trajectory):
        super().__init__(f"{message} (step {step}, t = {time:.6g})")
        self.step = step
        self.time = time
        self.partial = partial


def _hbar_chi(constants: Constants) -> float:
    """Effective Planck constant of the complexified-amplitude route."""
    return float(np.sqrt(4.0 * constants.B / constants.A))


def max_stable_dt(grid: GridSpec, metric: Metric, constants: Constants,
                  stability_factor: float = DEFAULT_STABILITY_FACTOR) -> float:
    """Largest dt the guard admits for this grid and mass assignment.

    The stiffness scale is hbar, or the chi-route's effective constant
    sqrt(4B/A) when that is larger (B above the quantum point).
    """
    dx_min = min(grid.spacings)
    m_min = min(metric.masses)
    scale = constants.hbar
    if constants.B > 0 and constants.A > 0:
        scale = max(scale, _hbar_chi(constants))
    return stability_factor * dx_min * dx_min * m_min / scale


def _check_guard(run: RunParams, grid: GridSpec, model: HamiltonianModel) -> None:
    limit = max_stable_dt(grid, model.metric, model.constants, run.stability_factor)
    if run.dt > limit * (1.0 + 1e-12):
        raise ConfigurationError(
            f"dt = {run.dt:.3e} exceeds the stability guard {limit:.3e} "
            f"(factor {run.stability_factor} on this grid)"
        )


@lru_cache(maxsize=32)
def _spectral_filter(grid: GridSpec, order: int) -> np.ndarray:
    """Exponential low-pass: exp(-36 (|k|/k_max)^order), ~1 below 2/3 k_max."""
    out = np.zeros(grid.shape)
    for ax in range(grid.ndim):
        k = np.abs(grid.wavenumbers(ax))
        ratio = k / k.max()
        shape = [1] * grid.ndim
        shape[ax] = grid.points[ax]
        out = out + (ratio ** order).reshape(shape)
    return np.exp(-36.0 * out)


@lru_cache(maxsize=8)
def _integrator_view(model: HamiltonianModel) -> HamiltonianModel:
    """The model with the integrator's derivative backend swapped in."""
    n = model.numerics
    if n.integrator_derivatives == n.derivatives:
        return model
    return replace(model, numerics=replace(n, derivatives=n.integrator_derivatives))


def _direct_rhs(state: FieldState, view: HamiltonianModel) -> tuple[np.ndarray, np.ndarray]:
    """Contract-form equations of motion, for routes with no density feedback."""
    rp = continuity_rhs(state, view)
    rs = hjb_rhs(state, view)
    n = view.numerics
    if n.filter_order and n.derivatives == "spectral":
        window = _spectral_filter(state.grid, n.filter_order)
        rp = np.fft.ifftn(window * np.fft.fftn(rp)).real
        rs = np.fft.ifftn(window * np.fft.fftn(rs)).real
    return rp, rs


def _step_direct(state: FieldState, model: HamiltonianModel, dt: float,
                 integrator: str) -> FieldState:
    view = _integrator_view(model)
    p0, s0 = state.p, state.s
    t = state.time

    def at(p, s, t):
        return state.with_fields(p=p, s=s, time=t)

    if integrator == "heun":
        k1p, k1s = _direct_rhs(state, view)
        k2p, k2s = _direct_rhs(at(p0 + dt * k1p, s0 + dt * k1s, t + dt), view)
        p1 = p0 + 0.5 * dt * (k1p + k2p)
        s1 = s0 + 0.5 * dt * (k1s + k2s)
    else:
        k1p, k1s = _direct_rhs(state, view)
        k2p, k2s = _direct_rhs(at(p0 + 0.5 * dt * k1p, s0 + 0.5 * dt * k1s, t + 0.5 * dt), view)
        k3p, k3s = _direct_rhs(at(p0 + 0.5 * dt * k2p, s0 + 0.5 * dt * k2s, t + 0.5 * dt), view)
        k4p, k4s = _direct_rhs(at(p0 + dt * k3p, s0 + dt * k3s, t + dt), view)
        p1 = p0 + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        s1 = s0 + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)

    return at(p1, s1, t + dt)


def _step_linear(state: FieldState, model: HamiltonianModel, dt: float,
                 integrator: str) -> FieldState:
    """RK step of the linear chi equation, then exact (p, S) reconstruction.

    The phase slope enters as the shifted operator (d + i slope/b)^2, which
    keeps chi itself periodic for any slope.
    """
    view = _integrator_view(model)
    grid = state.grid
    c = view.constants
    hb = _hbar_chi(c)
    d = derivative_backend(grid, view.numerics.derivatives)
    n = view.numerics
    window = None
    if n.filter_order and n.derivatives == "spectral":
        window = _spectral_filter(grid, n.filter_order)
    vterm = view.potential.evaluate(grid) / hb
    inv_mass = [1.0 / view.metric.mass_of_axis(ax) for ax in range(grid.ndim)]

    def rhs(chi):
        acc = np.zeros(grid.shape, dtype=complex)
        for ax in range(grid.ndim):
            lap = d.diff2(chi.real, ax) + 1j * d.diff2(chi.imag, ax)
            k0 = state.slope[ax] / hb
            if k0 != 0.0:
                der = d.diff(chi.real, ax) + 1j * d.diff(chi.imag, ax)
                lap = lap + 2j * k0 * der - (k0 * k0) * chi
            acc += (c.A * inv_mass[ax]) * lap
        out = 1j * (hb * acc - vterm * chi)
        if window is not None:
            out = np.fft.ifftn(window * np.fft.fftn(out))
        return out

    chi = np.sqrt(np.maximum(state.p, 0.0)) * np.exp(1j * (state.s / hb))
    if integrator == "heun":
        k1 = rhs(chi)
        k2 = rhs(chi + dt * k1)
        chi1 = chi + 0.5 * dt * (k1 + k2)
    else:
        k1 = rhs(chi)
        k2 = rhs(chi + 0.5 * dt * k1)
        k3 = rhs(chi + 0.5 * dt * k2)
        k4 = rhs(chi + dt * k3)
        chi1 = chi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    p1 = chi1.real ** 2 + chi1.imag ** 2
    theta = np.angle(chi1)
    for ax in range(grid.ndim):
        theta = np.unwrap(theta, axis=ax)
    # Branch anchor: the densest cell's temporal increment is unambiguous
    # under the guard, and unwrapping from there keeps every cell on a branch
    # consistent with the packet even after a tail cell passes through the
    # round-off noise level, where per-cell accumulation would fossilize an
    # arbitrary 2 pi offset.
    anchor = np.unravel_index(int(np.argmax(p1)), grid.shape)
    target = state.s[anchor] + hb * np.angle(chi1[anchor] * np.conj(chi[anchor]))
    s1 = hb * theta + (target - hb * theta[anchor])
    return state.with_fields(p=p1, s=s1, time=state.time + dt)


def step_hydro(state: FieldState, model: HamiltonianModel, dt: float,
               integrator: str = "rk4") -> FieldState:
    """One explicit Runge-Kutta step of dp/dt = dH/dS, dS/dt = -dH/dp.

    Routes on the constants (see the module docstring): B > 0 steps the
    complexified amplitude, B = 0 steps (p, S) directly with the contract
    rhs forms.  Neither route clamps the density.  The phase slope is a
    constant of the motion (the rhs fields are periodic) and is carried
    through unchanged.
    """
    if integrator not in ("rk4", "heun"):
        raise ConfigurationError(f"unknown integrator {integrator!r}")
    model.require_compatible(state.grid)
    c = model.constants
    if c.B > 0 and c.A > 0:
        return _step_linear(state, model, dt, integrator)
    return _step_direct(state, model, dt, integrator)


def _interior_floor_contact(p: np.ndarray, floor: float) -> bool:
    """True when a sub-floor cell sits inside the bright region's bounding box.

    Vacuum tails live below the floor by construction; what the floor cannot
    regularize is a node forming inside the packet itself.  The box is taken
    per axis in grid coordinates, so a packet straddling the periodic seam
    reads as grid-wide and may flag conservatively.
    """
    bright = p > 1e-6 * p.max()
    sub = p < floor
    if not sub.any():
        return False
    box = sub
    for ax in range(p.ndim):
        line = bright.any(axis=tuple(a for a in range(p.ndim) if a != ax))
        idx = np.nonzero(line)[0]
        keep = np.zeros(p.shape[ax], dtype=bool)
        keep[idx[0]: idx[-1] + 1] = True
        shape = [1] * p.ndim
        shape[ax] = p.shape[ax]
        box = box & keep.reshape(shape)
    return bool(box.any())


def _plan_steps(dt: float, t_final: float) -> tuple[int, float]:
    """Whole steps of dt plus one remainder step when t_final is not a multiple."""
    n = int(np.floor(t_final / dt + 1e-9))
    rem = t_final - n * dt
    if rem < 1e-9 * max(1.0, t_final):
        rem = 0.0
    return n, rem


def evolve_hydro(initial: FieldState, model: HamiltonianModel, run: RunParams) -> Trajectory:
    """Integrate to t_final, recording every snapshot_stride steps and at the end."""
    model.require_compatible(initial.grid)
    _check_guard(run, initial.grid, model)

    traj = Trajectory(snapshots=[initial], observables=[observables(initial, model)])
    norm0 = initial.norm()
    floor = model.numerics.density_floor
    flagged = False
    state = initial
    n, rem = _plan_steps(run.dt, run.t_final)
    total = n + (1 if rem else 0)
    for i in range(1, total + 1):
        dt = run.dt if i <= n else rem
        state = step_hydro(state, model, dt, run.integrator)
        bad = None
        if not (np.all(np.isfinite(state.p)) and np.all(np.isfinite(state.s))):
            bad = "non-finite field values"
        else:
            drift = abs(state.norm() - norm0)
            if drift > 1e-3:
                bad = f"norm drifted by {drift:.3e}"
        if bad is not None:
            raise BlowUpError(bad, step=i, time=state.time, partial=traj)
        if i % run.snapshot_stride == 0 or i == total:
            traj.snapshots.append(state)
            traj.observables.append(observables(state, model))
            if not flagged and _interior_floor_contact(state.p, floor):
                flagged = True
                traj.flags.append(
                    f"density reached the floor {floor:.1e} inside the bright region "
                    f"at t = {state.time:.6g}; near-node dynamics is out of scope and "
                    "the run past this point should not be trusted"
                )
    return traj


def _require_quantum_point(constants: Constants) -> None:
    if not constants.is_quantum_point(rtol=1e-9):
        raise ConfigurationError(
            "the reference solver integrates the linear wave equation, which "
            "matches the ensemble dynamics only at A = 1/2, B = hbar^2/8"
        )


def _kinetic_half_phase(grid: GridSpec, metric: Metric, hbar: float, dt: float) -> np.ndarray:
    ksq = np.zeros(grid.shape)
    for ax in range(grid.ndim):
        k = grid.wavenumbers(ax)
        shape = [1] * grid.ndim
        shape[ax] = grid.points[ax]
        ksq = ksq + (k ** 2).reshape(shape) / metric.mass_of_axis(ax)
    return np.exp(-0.25j * hbar * ksq * dt)


def step_reference(wf: Wavefunction, model: HamiltonianModel, dt: float) -> Wavefunction:
    """One Strang split step of i hbar дpsi/дt = [-(hbar^2/2) g d^2 + V] psi."""
    _require_quantum_point(model.constants)
    model.require_compatible(wf.grid)
    half = _kinetic_half_phase(wf.grid, model.metric, model.constants.hbar, dt)
    vphase = np.exp(-1j * model.potential.evaluate(wf.grid) * dt / model.constants.hbar)
    psi = np.fft.ifftn(half * np.fft.fftn(wf.psi))
    psi = vphase * psi
    psi = np.fft.ifftn(half * np.fft.fftn(psi))
    return Wavefunction(grid=wf.grid, psi=psi, time=wf.time + dt)


def evolve_reference(initial: Wavefunction, model: HamiltonianModel,
                     run: RunParams) -> Trajectory:
    """Drive step_reference to t_final with the same snapshot plan as evolve_hydro."""
    _require_quantum_point(model.constants)
    model.require_compatible(initial.grid)

    traj = Trajectory(snapshots=[initial],
                      observables=[observables_reference(initial, model)])
    wf = initial
    n, rem = _plan_steps(run.dt, run.t_final)
    total = n + (1 if rem else 0)
    for i in range(1, total + 1):
        dt = run.dt if i <= n else rem
        wf = step_reference(wf, model, dt)
        if i % run.snapshot_stride == 0 or i == total:
            traj.snapshots.append(wf)
            traj.observables.append(observables_reference(wf, model))
    return traj
