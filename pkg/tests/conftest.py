import pytest

from tailkit import logperiodic as lp
from tailkit import notched


@pytest.fixture(scope="session")
def nd3():
    return notched.build_density(3)


@pytest.fixture(scope="session")
def nd10():
    return notched.build_density(10)


@pytest.fixture(scope="session")
def lp_default():
    return lp.LogPeriodicParams()
