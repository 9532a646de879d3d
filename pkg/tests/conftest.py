import pytest

import oracles


@pytest.fixture(scope="session")
def s0():
    return oracles.predator_system("predator_s0")


@pytest.fixture(scope="session")
def s1():
    return oracles.predator_system("predator_s1")
