import numpy as np
import pytest

from cityeq import (
    CES2,
    CobbDouglas,
    FirmSpec,
    ModelParams,
    TeleFirmSpec,
    build_grid,
)

TEST1_LOCATIONS = (-7.0, 0.0, 3.0)
TEST1_TECH = dict(A=1e4, beta=0.7)
TEST2_TECH = dict(A=1e4, alpha=0.9, beta=0.7)


@pytest.fixture(scope="session")
def grid401():
    return build_grid(1, (-10.0, 10.0), 401)


@pytest.fixture(scope="session")
def grid101():
    return build_grid(1, (-10.0, 10.0), 101)


@pytest.fixture(scope="session")
def test1_firms():
    tech = CobbDouglas(**TEST1_TECH)
    return [FirmSpec((y,), tech) for y in TEST1_LOCATIONS]


@pytest.fixture(scope="session")
def test1_params():
    return ModelParams(theta=0.0, sigma=0.1, w0=12.0)


@pytest.fixture(scope="session")
def tele_firms_factory():
    def make(B, locations=TEST1_LOCATIONS):
        tech = CES2(B=B, **TEST2_TECH)
        return [TeleFirmSpec(np.atleast_1d(y), tech) for y in locations]

    return make
