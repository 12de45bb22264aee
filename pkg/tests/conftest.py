import pytest

import clockstat as cs


@pytest.fixture(scope="session")
def standard_model():
    """The workhorse parameter point: omega = 3, gamma = 7.5, eta = 1."""
    return cs.build_two_level_model(cs.TwoLevelParams(3.0, 7.5))


@pytest.fixture(scope="session")
def standard_profile():
    return cs.build_profile(3.0, 7.5)
