import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=75,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class ZeroNoiseRng:
    """Stand-in rng whose additive noise draws are exactly zero."""

    def laplace(self, loc=0.0, scale=1.0, size=None):
        if size is None:
            return loc
        return np.full(size, loc)


@pytest.fixture
def zero_noise_rng():
    return ZeroNoiseRng()
