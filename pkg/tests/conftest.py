import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# first call into the compiled window kernel pays JIT cost; property tests
# must not flag that as a per-example hang
settings.register_profile(
    "entcomb",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("entcomb")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
