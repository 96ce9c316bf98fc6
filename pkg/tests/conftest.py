import numpy as np
import pytest

from chemoseek import FeedbackGains, Haldane, PlantParams, PlantState


@pytest.fixture
def haldane():
    """Reference substrate-inhibited kinetics (mu_max=1, K=1, K_i=0.1)."""
    return Haldane(1.0, 1.0, 0.1)


@pytest.fixture
def plant(haldane):
    return PlantParams(1.0, haldane)


@pytest.fixture
def gains():
    return FeedbackGains()


@pytest.fixture
def ic():
    return PlantState(0.5, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
