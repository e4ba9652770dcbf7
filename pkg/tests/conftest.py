import pathlib

import numpy as np
import pytest

from schottkyvoa.io import load_surface
from schottkyvoa.moments import auto_moment_system
from schottkyvoa.schottky import validate_surface

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def genus1():
    return load_surface(DATA / "genus1.json")


@pytest.fixture(scope="session")
def genus2():
    return load_surface(DATA / "genus2.json")


@pytest.fixture(scope="session")
def genus3():
    return validate_surface(
        [1.0, 3j, -2.5 + 2j], [-1.0, -3j, 2.5 - 2.5j], [0.04, 0.02 + 0.01j, 0.03j]
    )


@pytest.fixture(scope="session")
def sys1(genus1):
    return auto_moment_system(genus1)


@pytest.fixture(scope="session")
def sys2(genus2):
    return auto_moment_system(genus2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tiny_rho(surface, magnitude=1e-9):
    """Same centres with every rho shrunk to `magnitude` (the rho -> 0 limit)."""
    rho = [magnitude * r / abs(r) for r in surface.rho]
    return validate_surface(list(surface.w_plus), list(surface.w_minus), rho)
