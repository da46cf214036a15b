import pytest
from mpmath import mp

from pcfbounds.numerics.context import PrecisionContext


@pytest.fixture(scope="session")
def ctx30():
    return PrecisionContext(digits=30)


@pytest.fixture(scope="session")
def ctx40():
    return PrecisionContext(digits=40)


@pytest.fixture(autouse=True)
def _reset_mp():
    dps = mp.dps
    yield
    mp.dps = dps
