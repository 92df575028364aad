import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from relblur import (
    build_weight_matrix,
    default_radial_grid,
    default_sigma_grid,
    make_quadrature_vector,
    make_radial_grid,
    make_sigma_grid,
)

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def sigma_grid():
    return default_sigma_grid()


@pytest.fixture(scope="session")
def radial_grid():
    return default_radial_grid()


@pytest.fixture(scope="session")
def quadrature(radial_grid):
    return make_quadrature_vector(radial_grid)


@pytest.fixture(scope="session")
def weights(sigma_grid, radial_grid):
    return build_weight_matrix(sigma_grid, radial_grid)


@pytest.fixture(scope="session")
def small_framework():
    """Cheap grids (side 21) for pipeline tests that loop over pixels."""
    sg = make_sigma_grid(8, 0.5, 2.0)
    rg = make_radial_grid(20)
    return sg, rg, build_weight_matrix(sg, rg), make_quadrature_vector(rg)


@pytest.fixture(scope="session")
def moon():
    skimage_data = pytest.importorskip("skimage.data")
    return skimage_data.moon().astype(np.float64) / 255.0
