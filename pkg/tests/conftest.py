import numpy as np
import pytest

from hydrostat.spectral import EVEN, SpectralField, make_grid


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16, 16, 16)


@pytest.fixture(scope="session")
def grid8():
    return make_grid(8, 8, 8)


def random_band_field(grid, seed, parity=None, band=None):
    """Hermitian random field restricted to low modes; test helper."""
    from hydrostat.spectral import _raw_parity_project, _raw_to_spec

    rng = np.random.default_rng(seed)
    c = _raw_to_spec(grid, rng.standard_normal(grid.shape))
    if band is None:
        band = grid.dealias_mask
    c = c * band
    if parity is not None:
        c = _raw_parity_project(grid, c, parity)
        return SpectralField(grid, c, parity)
    return SpectralField(grid, c, "none")


@pytest.fixture
def rand_even(grid16):
    return random_band_field(grid16, 1, EVEN)
