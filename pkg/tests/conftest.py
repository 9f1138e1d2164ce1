import random

import pytest

import qrev


@pytest.fixture(scope="session")
def allen():
    return qrev.allen()


@pytest.fixture(scope="session")
def rcc8():
    return qrev.rcc8()


@pytest.fixture()
def rng():
    return random.Random(0xA11E)
