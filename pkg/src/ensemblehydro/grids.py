"""Periodic uniform grids and discrete derivative backends.

All fields live on uniform tensor-product grids with periodic boundaries.
Derivatives are Fourier-spectral by default; a 4th-order central
finite-difference backend exists to cross-check discretization sensitivity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a grid, metric, or model is inconsistently specified."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic box in 1, 2, or 3 configuration-space dimensions.

    Points along axis k sample [lower[k], upper[k]) with spacing
    (upper-lower)/points; the right edge is identified with the left.
    """

    points: tuple[int, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(int(n) for n in self.points))
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        if not 1 <= len(self.points) <= 3:
            raise ConfigurationError(f"grid must have 1-3 dimensions, got {len(self.points)}")
        if not (len(self.lower) == len(self.upper) == len(self.points)):
            raise ConfigurationError("points/lower/upper must have equal lengths")
        for k, n in enumerate(self.points):
            if n < 8 or n % 2:
                raise ConfigurationError(f"axis {k}: need an even point count >= 8, got {n}")
            if self.upper[k] <= self.lower[k]:
                raise ConfigurationError(f"axis {k}: upper must exceed lower")

    @property
    def ndim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(u - l for l, u in zip(self.lower, self.upper))

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def axis_coords(self, k: int) -> np.ndarray:
        """Sample coordinates along axis k (left edge included, right excluded)."""
        n = self.points[k]
        return self.lower[k] + self.spacings[k] * np.arange(n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis ('ij' indexing)."""
        return tuple(np.meshgrid(*(self.axis_coords(k) for k in range(self.ndim)), indexing="ij"))

    def wavenumbers(self, k: int) -> np.ndarray:
        """Angular wavenumbers along axis k in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points[k], d=self.spacings[k])

    def integrate(self, f: np.ndarray) -> float:
        """Riemann sum on the periodic grid (spectrally accurate for smooth f)."""
        return float(np.sum(f) * self.cell_volume)

    def l2_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.integrate(np.abs(f) ** 2)))


class SpectralDerivatives:
    """FFT-based first and second derivatives on a periodic grid.

    The Nyquist mode is zeroed in first derivatives (odd operator on an even
    grid) which keeps the discrete operator antisymmetric; second derivatives
    keep the full -k^2 multiplier.
    """

    name = "spectral"

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self._ik = []
        self._mk2 = []
        for ax in range(grid.ndim):
            k = grid.wavenumbers(ax)
            ik = 1j * k
            ik[grid.points[ax] // 2] = 0.0
            shape = [1] * grid.ndim
            shape[ax] = grid.points[ax]
            self._ik.append(ik.reshape(shape))
            self._mk2.append(-(k ** 2).reshape(shape))

    def diff(self, f: np.ndarray, axis: int) -> np.ndarray:
        return np.fft.ifft(self._ik[axis] * np.fft.fft(f, axis=axis), axis=axis).real

    def diff2(self, f: np.ndarray, axis: int) -> np.ndarray:
        return np.fft.ifft(self._mk2[axis] * np.fft.fft(f, axis=axis), axis=axis).real


class CentralDifference4:
    """4th-order central finite differences on the same periodic grid."""

    name = "fd4"

    def __init__(self, grid: GridSpec):
        self.grid = grid

    def diff(self, f: np.ndarray, axis: int) -> np.ndarray:
        h = self.grid.spacings[axis]
        r = lambda s: np.roll(f, -s, axis=axis)
        return (8.0 * (r(1) - r(-1)) - (r(2) - r(-2))) / (12.0 * h)

    def diff2(self, f: np.ndarray, axis: int) -> np.ndarray:
        h = self.grid.spacings[axis]
        r = lambda s: np.roll(f, -s, axis=axis)
        return (-(r(2) + r(-2)) + 16.0 * (r(1) + r(-1)) - 30.0 * f) / (12.0 * h * h)


_BACKENDS = {"spectral": SpectralDerivatives, "fd4": CentralDifference4}


def derivative_backend(grid: GridSpec, name: str = "spectral"):
    try:
        cls = _BACKENDS[name]
    except KeyError:
        raise ConfigurationError(f"unknown derivative backend {name!r}") from None
    return cls(grid)
