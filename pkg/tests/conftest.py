import numpy as np
import pytest

from qpcool import ModelParams, diagonalize, element_table

PM_POINT = (0.1, 0.2)
AFM_POINT = (0.2, 0.1)


@pytest.fixture(scope="session")
def spectra():
    """Cached spectra keyed by (J, g, N)."""
    cache = {}

    def get(J, g, n):
        key = (J, g, n)
        if key not in cache:
            cache[key] = diagonalize(ModelParams(J, g, n))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def tables(spectra):
    """Cached element tables keyed by (J, g, N)."""
    cache = {}

    def get(J, g, n):
        key = (J, g, n)
        if key not in cache:
            cache[key] = element_table(spectra(J, g, n))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
