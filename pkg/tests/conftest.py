import numpy as np
import pytest

from auxcell import mesh as meshmod
from auxcell import materials


@pytest.fixture(scope="session")
def mesh16():
    return meshmod.build_mesh(16)


@pytest.fixture(scope="session")
def mesh20():
    return meshmod.build_mesh(20)


@pytest.fixture(scope="session")
def mesh50():
    return meshmod.build_mesh(50)


@pytest.fixture(scope="session")
def stock_phases(mesh50):
    """Example-1 phase set on the n=50 grid (eps = 2*dx)."""
    return materials.PhaseSet.from_moduli(
        (0.91, 0.0001, 1.82, 0.0001), (0.3,) * 4,
        volume_targets=(0.30, 0.0, 0.04, 0.0), eps=2 * mesh50.dx)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
