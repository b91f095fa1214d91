import numpy as np
import pytest

from geoops import meshes
from geoops.shapes import AirfoilParams, generate_airfoil


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_cube():
    return meshes.cube()


@pytest.fixture(scope="session")
def sphere4():
    return meshes.icosphere(4)


@pytest.fixture(scope="session")
def ring_torus():
    return meshes.torus()


@pytest.fixture(scope="session")
def mid_airfoil():
    return generate_airfoil(AirfoilParams.midpoint())


@pytest.fixture
def bow_tie():
    return np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
