import numpy as np
import pytest

from sibsonmi.instances import reference_joint


@pytest.fixture
def ref():
    return reference_joint()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
