from __future__ import annotations

import numpy as np
import pytest

from ensemblehydro import (Constants, FieldState, FreePotential, GridSpec,
                           HamiltonianModel, Metric, normalize)


@pytest.fixture
def grid64() -> GridSpec:
    return GridSpec(points=(64,), lower=(-10.0,), upper=(10.0,))


@pytest.fixture
def grid512() -> GridSpec:
    return GridSpec(points=(512,), lower=(-20.0,), upper=(20.0,))


def free_model(constants: Constants | None = None, masses=(1.0,), **numerics) -> HamiltonianModel:
    from ensemblehydro import NumericsPolicy

    return HamiltonianModel(
        constants=constants if constants is not None else Constants(),
        metric=Metric(masses=masses),
        potential=FreePotential(),
        numerics=NumericsPolicy(**numerics),
    )


def gaussian_state(grid: GridSpec, sigma: float = 1.0, center: float = 0.0) -> FieldState:
    x = grid.mesh[0]
    p = normalize(np.exp(-((x - center) ** 2) / (2.0 * sigma**2)), grid)
    return FieldState(grid=grid, p=p, s=np.zeros(grid.shape))
