import numpy as np
import pytest
from hypothesis import settings

from koopctl import kernels

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param
