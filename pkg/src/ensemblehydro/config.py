"""Flat key = value run configuration.

The format is deliberately diff-friendly: one `key = value` per line, dotted
section prefixes, `#` comments, no nesting.  Unknown keys are errors, so a
typo cannot silently fall back to a default.  Every run echoes the fully
resolved configuration (defaults filled in) so the output directory records
exactly what executed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .evolution import RunParams, max_stable_dt
from .fields import Constants, Metric
from .grids import ConfigurationError, GridSpec
from .hamiltonian import NumericsPolicy
from .potentials import FreePotential, HarmonicPotential
from .scenarios import Scenario, coherent_state, gaussian_packet, preset_scenario

_FLOAT = "float"
_INT = "int"
_STR = "str"

# every accepted key and how its value is read
_KEY_TYPES = {
    "scenario.name": _STR,
    "scenario.kind": _STR,
    "scenario.points": _INT,
    "scenario.lower": _FLOAT,
    "scenario.upper": _FLOAT,
    "scenario.mass": _FLOAT,
    "scenario.mu": _FLOAT,
    "scenario.sigma": _FLOAT,
    "scenario.velocity": _FLOAT,
    "scenario.omega": _FLOAT,
    "scenario.displacement": _FLOAT,
    "scenario.potential": _STR,
    "scenario.spring": _FLOAT,
    "scenario.potential_center": _FLOAT,
    "model.hbar": _FLOAT,
    "model.A": _FLOAT,
    "model.B": _FLOAT,
    "run.dt": _FLOAT,
    "run.t_final": _FLOAT,
    "run.snapshot_stride": _INT,
    "run.integrator": _STR,
    "run.stability_factor": _FLOAT,
    "numerics.density_floor": _FLOAT,
    "numerics.derivatives": _STR,
    "numerics.integrator_derivatives": _STR,
    "numerics.division": _STR,
    "numerics.filter_order": _INT,
}

_INLINE_KINDS = ("gaussian-packet", "coherent-state")


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run: scenario, step plan, and numerics."""

    scenario: Scenario
    run: RunParams
    numerics: NumericsPolicy


def _parse_entries(text: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not eq or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in entries:
            raise ConfigurationError(
                f"line {lineno}: duplicate key {key!r} (first set on line {entries[key][1]})"
            )
        if key not in _KEY_TYPES:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        entries[key] = (value, lineno)
    return entries


class _Entries:
    """Typed, consumption-tracked access to the raw key/value map."""

    def __init__(self, entries: dict[str, tuple[str, int]]):
        self._entries = entries

    def has(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str, default=None):
        if key not in self._entries:
            return default
        value, lineno = self._entries[key]
        kind = _KEY_TYPES[key]
        try:
            if kind == _FLOAT:
                return float(value)
            if kind == _INT:
                return int(value)
            return value
        except ValueError:
            raise ConfigurationError(
                f"line {lineno}: key {key!r} needs a {kind} value, got {value!r}"
            ) from None

    def line(self, key: str) -> int:
        return self._entries[key][1]


def _build_constants(e: _Entries) -> Constants | None:
    """Constants from model.* keys, or None when the scenario's own should rule."""
    if not any(e.has(k) for k in ("model.hbar", "model.A", "model.B")):
        return None
    return Constants(hbar=e.get("model.hbar", 1.0), A=e.get("model.A", 0.5),
                     B=e.get("model.B"))


def _build_inline(e: _Entries, constants: Constants | None) -> Scenario:
    kind = e.get("scenario.kind")
    if kind not in _INLINE_KINDS:
        raise ConfigurationError(
            f"scenario.kind must be one of {', '.join(_INLINE_KINDS)}, got {kind!r}"
        )
    for key in ("scenario.points", "scenario.lower", "scenario.upper"):
        if not e.has(key):
            raise ConfigurationError(f"inline scenarios need {key}")
    grid = GridSpec(points=(e.get("scenario.points"),),
                    lower=(e.get("scenario.lower"),), upper=(e.get("scenario.upper"),))
    metric = Metric(masses=(e.get("scenario.mass", 1.0),))
    con = constants if constants is not None else Constants()

    if kind == "coherent-state":
        for key in ("scenario.mu", "scenario.sigma", "scenario.velocity", "scenario.potential"):
            if e.has(key):
                raise ConfigurationError(f"{key} does not apply to a coherent state")
        omega = e.get("scenario.omega", 1.0)
        if omega <= 0:
            raise ConfigurationError("scenario.omega must be positive")
        center = e.get("scenario.potential_center", 0.0)
        initial = coherent_state(grid, metric, con, omega=omega,
                                 displacement=e.get("scenario.displacement", 0.0))
        potential = HarmonicPotential(spring=(metric.masses[0] * omega * omega,),
                                      center=(center,))
        return Scenario("inline-coherent-state", grid, metric, con, potential, initial,
                        default_t_final=2.0 * math.pi / omega)

    for key in ("scenario.omega", "scenario.displacement"):
        if e.has(key):
            raise ConfigurationError(f"{key} applies only to a coherent state")
    initial = gaussian_packet(grid, metric, con, mu=[e.get("scenario.mu", 0.0)],
                              sigma=[e.get("scenario.sigma", 1.0)],
                              k=[e.get("scenario.velocity", 0.0)])
    pot_kind = e.get("scenario.potential", "free")
    if pot_kind == "free":
        if e.has("scenario.spring") or e.has("scenario.potential_center"):
            raise ConfigurationError("spring and potential_center need scenario.potential = harmonic")
        potential = FreePotential()
    elif pot_kind == "harmonic":
        potential = HarmonicPotential(spring=(e.get("scenario.spring", 1.0),),
                                      center=(e.get("scenario.potential_center", 0.0),))
    else:
        raise ConfigurationError(f"scenario.potential must be free or harmonic, got {pot_kind!r}")
    return Scenario("inline-gaussian-packet", grid, metric, con, potential, initial,
                    default_t_final=2.0)


def default_dt(scenario: Scenario, t_final: float, stability_factor: float) -> float:
    """Largest dt dividing t_final evenly while staying at 90% of the guard."""
    guard = max_stable_dt(scenario.grid, scenario.metric, scenario.constants,
                          stability_factor)
    steps = max(1, math.ceil(t_final / (0.9 * guard)))
    return t_final / steps


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration; every default is resolved here."""
    e = _Entries(_parse_entries(text))

    constants = _build_constants(e)
    if e.has("scenario.name") and e.has("scenario.kind"):
        raise ConfigurationError("scenario.name and scenario.kind are mutually exclusive")
    if e.has("scenario.name"):
        for key in _KEY_TYPES:
            if key.startswith("scenario.") and key != "scenario.name" and e.has(key):
                raise ConfigurationError(f"{key} does not apply to a preset scenario")
        scenario = preset_scenario(e.get("scenario.name"), constants)
    elif e.has("scenario.kind"):
        scenario = _build_inline(e, constants)
    else:
        raise ConfigurationError("config must set scenario.name or scenario.kind")

    numerics = NumericsPolicy(
        density_floor=e.get("numerics.density_floor", 1e-12),
        derivatives=e.get("numerics.derivatives", "spectral"),
        integrator_derivatives=e.get("numerics.integrator_derivatives", "spectral"),
        division=e.get("numerics.division", "clamp"),
        filter_order=e.get("numerics.filter_order", 16),
    )

    t_final = e.get("run.t_final", scenario.default_t_final)
    stability_factor = e.get("run.stability_factor", 0.2)
    dt = e.get("run.dt")
    if dt is None:
        dt = default_dt(scenario, t_final, stability_factor)
    run = RunParams(dt=dt, t_final=t_final,
                    snapshot_stride=e.get("run.snapshot_stride", 10),
                    integrator=e.get("run.integrator", "rk4"),
                    stability_factor=stability_factor)
    guard = max_stable_dt(scenario.grid, scenario.metric, scenario.constants,
                          stability_factor)
    if run.dt > guard * (1.0 + 1e-12):
        raise ConfigurationError(
            f"run.dt = {run.dt:.3e} exceeds the stability guard {guard:.3e} "
            f"for this grid and constants"
        )
    return RunConfig(scenario=scenario, run=run, numerics=numerics)


def effective_config(cfg: RunConfig, extra: dict[str, str] | None = None) -> str:
    """The fully resolved configuration as sorted key = value text.

    Identical inputs produce identical text; the CLI writes it next to the
    data so every output directory states what produced it.
    """
    scn = cfg.scenario
    pairs: dict[str, str] = {
        "scenario.name": scn.name,
        "model.hbar": repr(scn.constants.hbar),
        "model.A": repr(scn.constants.A),
        "model.B": repr(scn.constants.B),
        "run.dt": repr(cfg.run.dt),
        "run.t_final": repr(cfg.run.t_final),
        "run.snapshot_stride": repr(cfg.run.snapshot_stride),
        "run.integrator": cfg.run.integrator,
        "run.stability_factor": repr(cfg.run.stability_factor),
        "numerics.density_floor": repr(cfg.numerics.density_floor),
        "numerics.derivatives": cfg.numerics.derivatives,
        "numerics.integrator_derivatives": cfg.numerics.integrator_derivatives,
        "numerics.division": cfg.numerics.division,
        "numerics.filter_order": repr(cfg.numerics.filter_order),
    }
    if extra:
        pairs.update(extra)
    return "".join(f"{key} = {pairs[key]}\n" for key in sorted(pairs))
