import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_collection_modifyitems(items):
    # keep the long statistical runs at the end so quick failures show first
    items.sort(key=lambda it: it.get_closest_marker("slow") is not None)
