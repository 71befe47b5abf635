import numpy as np
import pytest

from nnkop import DensityKernel


@pytest.fixture
def kernel():
    return DensityKernel()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
