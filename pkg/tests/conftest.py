import numpy as np
import pytest
from hypothesis import settings

from couette_lab import Grid
from couette_lab.initial import make_initial

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def grid():
    return Grid(8, 32)


@pytest.fixture
def field(grid):
    return make_initial(grid, "random_band", 1.0, 0.0, seed=7)


def random_real_field(grid, rng):
    from couette_lab.spectral import PhysicalField, to_spectral

    return to_spectral(PhysicalField(grid, rng.standard_normal((grid.Nz, grid.Nv))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
