import numpy as np
import pytest

from spacesplit import OBSERVABLES, BakerMap


@pytest.fixture(scope="session")
def baker():
    return BakerMap()


@pytest.fixture(scope="session")
def cos4x2():
    return OBSERVABLES["cos4x2"]


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
