import warnings

import numpy as np
import pytest
from hypothesis import settings

from sichain.semigroup import ExpmOverflowWarning

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_overflow():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExpmOverflowWarning)
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
