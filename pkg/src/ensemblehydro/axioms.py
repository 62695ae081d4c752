"""Executable checks of the structural properties the Hamiltonian density is built on.

Each check measures a deviation, compares it against a fixed tolerance, and
returns an AxiomReport.  A check that cannot fail is worthless, so every
check accepts a named `control` variant that deliberately breaks the property
it tests; the controls are exercised in the test suite and must fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .evolution import RunParams, Trajectory, evolve_hydro, max_stable_dt
from .fields import (Constants, FieldState, Metric, check_winding_consistency,
                     normalize, to_wavefunction)
from .grids import ConfigurationError, GridSpec, derivative_backend
from .hamiltonian import HamiltonianModel, NumericsPolicy, hamiltonian_density, total_hamiltonian
from .potentials import FreePotential, HarmonicPotential, SampledPotential
from .scenarios import Scenario, gaussian_packet, preset_scenario

SCALE_TOL = 1e-12
POSITIVITY_TOL = 1e-12
SEPARABILITY_TOL = 1e-6
BOOST_TOL = 1e-4
UNIFORM_MIN_TOL = 1e-12


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of one check: passed is always (deviation <= tolerance)."""

    name: str
    deviation: float
    tolerance: float
    passed: bool
    details: str


def _report(name: str, deviation: float, tolerance: float, details: str) -> AxiomReport:
    return AxiomReport(name=name, deviation=float(deviation), tolerance=float(tolerance),
                       passed=bool(deviation <= tolerance), details=details)


def _band_limited(grid: GridSpec, rng: np.random.Generator, modes: int) -> np.ndarray:
    """Random superposition of the lowest `modes` periodic waves per axis."""
    out = np.zeros(grid.shape)
    for ax in range(grid.ndim):
        x = grid.mesh[ax]
        length = grid.upper[ax] - grid.lower[ax]
        for n in range(1, modes + 1):
            a, b = rng.standard_normal(2) / (1.0 + n * n)
            w = 2.0 * math.pi * n / length
            out = out + a * np.cos(w * x) + b * np.sin(w * x)
    return out


def random_nodeless_state(grid: GridSpec, rng: np.random.Generator,
                          modes: int = 6, sharpness: float = 3.0,
                          phase_scale: float = 1.0) -> FieldState:
    """Smooth random normalized state with a strictly positive density.

    The density is a softplus of a band-limited random field, so it is
    analytic, bounded away from zero, and well resolved on any grid that
    resolves the first `modes` box harmonics.
    """
    p = normalize(np.logaddexp(0.0, sharpness * _band_limited(grid, rng, modes)), grid)
    s = phase_scale * _band_limited(grid, rng, modes)
    return FieldState(grid=grid, p=p, s=s, slope=(0.0,) * grid.ndim)


def check_scale_invariance(state: FieldState, model: HamiltonianModel,
                           lambdas: tuple[float, ...] = (0.1, 3.0, 100.0),
                           control: str | None = None) -> AxiomReport:
    """h(lambda p) = h(p): the density enters h only through d ln p.

    control="gradient-squared" replaces the information term by B g (dp)^2,
    which scales like lambda^2 and must blow the tolerance.
    """
    if control not in (None, "gradient-squared"):
        raise ConfigurationError(f"unknown control {control!r}")
    if any(lam <= 0 for lam in lambdas):
        raise ConfigurationError("scale factors must be positive")

    def density(st: FieldState) -> np.ndarray:
        if control is None:
            return hamiltonian_density(st, model)
        d = derivative_backend(st.grid, model.numerics.derivatives)
        c = model.constants
        h = np.zeros(st.grid.shape)
        for ax in range(st.grid.ndim):
            g = 1.0 / model.metric.mass_of_axis(ax)
            h += g * c.A * (d.diff(st.s, ax) + st.slope[ax]) ** 2
            h += g * c.B * d.diff(st.p, ax) ** 2
        return h

    base = density(state)
    worst = 0.0
    for lam in lambdas:
        scaled = density(state.with_fields(p=lam * state.p))
        worst = max(worst, float(np.max(np.abs(scaled - base) / (1.0 + np.abs(base)))))
    return _report("scale-invariance", worst, SCALE_TOL,
                   f"lambdas={list(lambdas)}, control={control}")


def check_positivity(grid: GridSpec, model: HamiltonianModel,
                     trials: int = 50, seed: int = 0) -> AxiomReport:
    """H >= 0 over random nodeless states when V >= 0 and A, B >= 0.

    The sensitivity control is structural: Constants rejects negative A or B
    at construction, which the test suite asserts directly.
    """
    if not model.potential.is_nonnegative():
        raise ConfigurationError("positivity holds only for non-negative potentials")
    rng = np.random.default_rng(seed)
    lowest = math.inf
    for _ in range(trials):
        state = random_nodeless_state(grid, rng)
        lowest = min(lowest, total_hamiltonian(state, model))
    return _report("positivity", max(0.0, -lowest), POSITIVITY_TOL,
                   f"min H = {lowest:.3e} over {trials} states")


def _tensor_grid(a: GridSpec, b: GridSpec) -> GridSpec:
    return GridSpec(points=a.points + b.points, lower=a.lower + b.lower,
                    upper=a.upper + b.upper)


def check_separability(scenario_a: Scenario, scenario_b: Scenario, run: RunParams,
                       numerics: NumericsPolicy = NumericsPolicy(),
                       control: str | None = None) -> AxiomReport:
    """Product states stay products under the combined evolution.

    Evolves the 2D tensor state p_a x p_b alongside the two 1D factors and
    measures (i) the worst snapshot L2 distance between the 2D density and
    the product of the evolved factors and (ii) the worst live-region spread
    of S_2d - (S_a + S_b), which may differ from zero only by a constant.
    The live region is where p exceeds 1e-9 of its peak; phase is carried by
    density and means nothing in vacuum tails.

    control="couple" adds a bilinear x*y term to the 2D potential, entangling
    the factors; the check must then fail.
    """
    if control not in (None, "couple"):
        raise ConfigurationError(f"unknown control {control!r}")
    if scenario_a.grid.ndim != 1 or scenario_b.grid.ndim != 1:
        raise ConfigurationError("separability check combines two 1D scenarios")
    if scenario_a.constants != scenario_b.constants:
        raise ConfigurationError("the two factors must share hbar, A, B")

    grid2 = _tensor_grid(scenario_a.grid, scenario_b.grid)
    metric2 = Metric(masses=(scenario_a.metric.masses[0], scenario_b.metric.masses[0]))
    va = scenario_a.potential.evaluate(scenario_a.grid)
    vb = scenario_b.potential.evaluate(scenario_b.grid)
    v2 = va[:, None] + vb[None, :]
    if control == "couple":
        v2 = v2 + 0.5 * np.multiply.outer(scenario_a.grid.mesh[0], scenario_b.grid.mesh[0])
    potential2 = FreePotential() if not v2.any() else SampledPotential(values=v2)
    model2 = HamiltonianModel(constants=scenario_a.constants, metric=metric2,
                              potential=potential2, numerics=numerics)

    sa, sb = scenario_a.initial, scenario_b.initial
    initial2 = FieldState(grid=grid2, p=np.multiply.outer(sa.p, sb.p),
                          s=np.add.outer(sa.s, sb.s),
                          slope=(sa.slope[0], sb.slope[0]))

    traj2 = evolve_hydro(initial2, model2, run)
    traja = evolve_hydro(sa, scenario_a.model(numerics), run)
    trajb = evolve_hydro(sb, scenario_b.model(numerics), run)

    worst_p = 0.0
    worst_s = 0.0
    for st2, sta, stb in zip(traj2.snapshots, traja.snapshots, trajb.snapshots):
        dp = st2.p - np.multiply.outer(sta.p, stb.p)
        worst_p = max(worst_p, math.sqrt(grid2.integrate(dp * dp)))
        ds = st2.s - np.add.outer(sta.s, stb.s)
        live = st2.p > 1e-9 * st2.p.max()
        spread = ds[live] - ds[live].mean()
        worst_s = max(worst_s, float(np.max(np.abs(spread))))
    return _report("separability", max(worst_p, worst_s), SEPARABILITY_TOL,
                   f"density L2 {worst_p:.3e}, phase spread {worst_s:.3e}, "
                   f"masses {metric2.masses}, control={control}")


def _boost(state: FieldState, metric: Metric, v: float, t: float,
           energy_term: bool = True) -> FieldState:
    """Galilean map p'(x) = p(x - vt), S'(x) = S(x - vt) + m v x - m v^2 t / 2.

    The spatial shift must land on a whole number of cells; the linear piece
    m v x moves into the slope channel.
    """
    grid = state.grid
    dx = grid.spacings[0]
    cells = v * t / dx
    n = int(round(cells))
    if abs(cells - n) > 1e-9 * max(1.0, abs(cells)):
        raise ConfigurationError("boost shift v t must be a whole number of cells")
    m = metric.mass_of_axis(0)
    s = np.roll(state.s, n) - state.slope[0] * v * t
    if energy_term:
        s = s - 0.5 * m * v * v * t
    return state.with_fields(p=np.roll(state.p, n), s=s, slope=(state.slope[0] + m * v,))


def check_galilean_boost(scenario: Scenario, v: float, run: RunParams,
                         numerics: NumericsPolicy = NumericsPolicy(),
                         control: str | None = None) -> AxiomReport:
    """Boosting then evolving equals evolving then boosting, for free motion.

    Deviation is the larger of the L2 density difference and the L2
    wavefunction difference between the two paths at t_final; the latter is
    the density-weighted phase comparison, sensitive to every term of the
    boost map including the -m v^2 t / 2 energy phase.

    control="drop-energy-phase" omits that phase from the post-evolution
    boost, a wrong map the wavefunction metric must reject.
    """
    if control not in (None, "drop-energy-phase"):
        raise ConfigurationError(f"unknown control {control!r}")
    if scenario.grid.ndim != 1:
        raise ConfigurationError("boost check is a 1D check")
    if not isinstance(scenario.potential, FreePotential):
        raise ConfigurationError("boost covariance needs a free potential")
    constants = scenario.constants
    metric = scenario.metric
    boosted_slope = (scenario.initial.slope[0] + metric.mass_of_axis(0) * v,)
    check_winding_consistency(scenario.grid, boosted_slope, constants.hbar)

    model = scenario.model(numerics)
    first = evolve_hydro(_boost(scenario.initial, metric, v, 0.0), model, run).final
    plain = evolve_hydro(scenario.initial, model, run).final
    second = _boost(plain, metric, v, run.t_final,
                    energy_term=(control != "drop-energy-phase"))

    dp = first.p - second.p
    dev_p = math.sqrt(scenario.grid.integrate(dp * dp))
    dpsi = to_wavefunction(first, constants).psi - to_wavefunction(second, constants).psi
    dev_psi = math.sqrt(scenario.grid.integrate(np.abs(dpsi) ** 2))
    return _report("galilean-boost", max(dev_p, dev_psi), BOOST_TOL,
                   f"density L2 {dev_p:.3e}, wavefunction L2 {dev_psi:.3e}, "
                   f"v={v:.6g}, control={control}")


def check_uniform_minimum(grid: GridSpec, model: HamiltonianModel,
                          s_fixed: np.ndarray | None = None,
                          trials: int = 100, seed: int = 0,
                          control: str | None = None) -> AxiomReport:
    """At V = 0 and fixed S = 0, no sampled density beats uniform p.

    The information term is a non-negative integrand vanishing exactly at
    uniform p, so H(uniform) - min H over trials must stay <= 0.

    control="with-potential" swaps in a harmonic well, where concentrating
    mass at the bottom beats uniform and the check must fail.
    """
    if control not in (None, "with-potential"):
        raise ConfigurationError(f"unknown control {control!r}")
    if control == "with-potential":
        model = replace(model, potential=HarmonicPotential(spring=(1.0,) * grid.ndim))
    elif not isinstance(model.potential, FreePotential):
        raise ConfigurationError("the uniform-minimum statement needs V = 0")
    if s_fixed is None:
        s_fixed = np.zeros(grid.shape)

    volume = float(np.prod([grid.upper[ax] - grid.lower[ax] for ax in range(grid.ndim)]))
    uniform = FieldState(grid=grid, p=np.full(grid.shape, 1.0 / volume),
                         s=s_fixed, slope=(0.0,) * grid.ndim)
    h_uniform = total_hamiltonian(uniform, model)

    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(trials):
        state = random_nodeless_state(grid, rng).with_fields(s=s_fixed)
        best = min(best, total_hamiltonian(state, model))
    return _report("uniform-minimum", h_uniform - best, UNIFORM_MIN_TOL,
                   f"H(uniform) = {h_uniform:.3e}, best sampled H = {best:.3e}, "
                   f"{trials} trials, control={control}")


def _guarded_run(grid: GridSpec, metric: Metric, constants: Constants,
                 t_final: float, stride: int = 20) -> RunParams:
    dt_max = 0.9 * max_stable_dt(grid, metric, constants)
    steps = max(1, math.ceil(t_final / dt_max))
    return RunParams(dt=t_final / steps, t_final=t_final, snapshot_stride=stride)


def run_axiom_suite(seed: int = 0,
                    numerics: NumericsPolicy = NumericsPolicy()) -> list[AxiomReport]:
    """All five checks on the shipped default configurations."""
    free = preset_scenario("free-quantum-gaussian")
    model = free.model(numerics)

    grid1 = GridSpec(points=(256,), lower=(-10.0,), upper=(10.0,))
    free_model = HamiltonianModel(constants=free.constants, metric=Metric(masses=(1.0,)),
                                  potential=FreePotential(), numerics=numerics)

    grid_a = GridSpec(points=(128,), lower=(-10.0,), upper=(10.0,))
    metric_b = Metric(masses=(2.0,))
    part_a = Scenario("factor-a", grid_a, Metric(masses=(1.0,)), free.constants,
                      FreePotential(),
                      gaussian_packet(grid_a, Metric(masses=(1.0,)), free.constants,
                                      mu=[0.0], sigma=[1.0]))
    part_b = Scenario("factor-b", grid_a, metric_b, free.constants, FreePotential(),
                      gaussian_packet(grid_a, metric_b, free.constants,
                                      mu=[0.0], sigma=[1.0]))

    v = 0.2 * math.pi
    t_boost = 8 * free.grid.spacings[0] / v

    # The scale state must keep lambda * p above the division floor everywhere,
    # or the regularization (not the functional) sets the deviation; a softplus
    # state is bounded away from zero, which no boundary-compatible Gaussian is.
    scale_state = random_nodeless_state(grid1, np.random.default_rng(seed))
    return [
        check_scale_invariance(scale_state, free_model),
        check_positivity(grid1, free_model, trials=50, seed=seed),
        check_separability(part_a, part_b,
                           _guarded_run(grid_a, Metric(masses=(1.0,)), free.constants, 1.0),
                           numerics),
        check_galilean_boost(free, v,
                             _guarded_run(free.grid, free.metric, free.constants, t_boost),
                             numerics),
        check_uniform_minimum(grid1, free_model, trials=100, seed=seed),
    ]
