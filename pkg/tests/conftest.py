import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kperimeter import Box, build_weights, make_domain, make_kernel, rescale

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def small_domain(kernel_id="exp:lambda=1", n=16, reach_cells=3, d=2):
    """Unit box at n cells per side with the kernel rescaled to reach a few cells."""
    k = make_kernel(kernel_id, d)
    h = 1.0 / n
    kr = rescale(k, reach_cells * h / k.truncation_radius)
    dom = make_domain(Box((0.0,) * d, (1.0,) * d), h, kr.truncation_radius)
    return dom, build_weights(kr, dom.grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def exp_domain():
    return small_domain()
