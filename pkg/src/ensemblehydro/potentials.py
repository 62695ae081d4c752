"""External potentials V(x), evaluable on any grid of matching dimension."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import ConfigurationError, GridSpec


@dataclass(frozen=True)
class FreePotential:
    kind = "free"

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        return np.zeros(grid.shape)

    def is_nonnegative(self) -> bool:
        return True


@dataclass(frozen=True)
class HarmonicPotential:
    """V = 1/2 sum_k spring[k] (x_k - center[k])^2, one spring constant per axis."""

    spring: tuple[float, ...]
    center: tuple[float, ...] = ()

    kind = "harmonic"

    def __post_init__(self):
        object.__setattr__(self, "spring", tuple(float(k) for k in self.spring))
        if not self.center:
            object.__setattr__(self, "center", (0.0,) * len(self.spring))
        else:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != len(self.spring):
            raise ConfigurationError("harmonic potential needs one center per spring constant")
        if any(k < 0 for k in self.spring):
            raise ConfigurationError("spring constants must be non-negative")

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        if grid.ndim != len(self.spring):
            raise ConfigurationError("harmonic potential dimension does not match grid")
        v = np.zeros(grid.shape)
        for ax, (k, c) in enumerate(zip(self.spring, self.center)):
            v = v + 0.5 * k * (grid.mesh[ax] - c) ** 2
        return v

    def is_nonnegative(self) -> bool:
        return True


@dataclass(frozen=True)
class BarrierPotential:
    """Gaussian bump: height * exp(-|x - center|^2 / (2 width^2))."""

    height: float
    center: tuple[float, ...]
    width: float

    kind = "barrier"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.width <= 0:
            raise ConfigurationError("barrier width must be positive")

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        if grid.ndim != len(self.center):
            raise ConfigurationError("barrier center dimension does not match grid")
        r2 = np.zeros(grid.shape)
        for ax, c in enumerate(self.center):
            r2 = r2 + (grid.mesh[ax] - c) ** 2
        return self.height * np.exp(-r2 / (2.0 * self.width ** 2))

    def is_nonnegative(self) -> bool:
        return self.height >= 0


@dataclass(frozen=True, eq=False)
class SampledPotential:
    """V given as an array on the target grid (e.g. loaded from a snapshot file)."""

    values: np.ndarray

    kind = "sampled"

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("sampled potential must be finite everywhere")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        if self.values.shape != grid.shape:
            raise ConfigurationError(
                f"sampled potential shape {self.values.shape} does not match grid {grid.shape}"
            )
        return np.array(self.values)

    def is_nonnegative(self) -> bool:
        return bool(self.values.min() >= 0)


Potential = FreePotential | HarmonicPotential | BarrierPotential | SampledPotential


def make_potential(kind: str, **params) -> Potential:
    """Build a potential from config-style keyword parameters."""
    if kind == "free":
        if params:
            raise ConfigurationError("free potential takes no parameters")
        return FreePotential()
    if kind == "harmonic":
        try:
            return HarmonicPotential(**params)
        except TypeError as e:
            raise ConfigurationError(f"harmonic potential: {e}") from None
    if kind == "barrier":
        try:
            return BarrierPotential(**params)
        except TypeError as e:
            raise ConfigurationError(f"barrier potential: {e}") from None
    if kind == "sampled":
        try:
            return SampledPotential(**params)
        except TypeError as e:
            raise ConfigurationError(f"sampled potential: {e}") from None
    raise ConfigurationError(f"unknown potential kind {kind!r}")
