import numpy as np
import pytest

from cubessl.geometry import cubical_array
from cubessl.pipeline import LocalizerConfig


@pytest.fixture(scope="session")
def cube():
    return cubical_array(0.15)


@pytest.fixture(scope="session")
def localizer(cube):
    return LocalizerConfig(array=cube)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
