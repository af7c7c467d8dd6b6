import numpy as np
import pytest

from otfs.config import make_config


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cfg84():
    return make_config(8, 4, cp_len=3)
