import math

import pytest
import torch

from models.scenario import default_scenario
from services.environment import OBS_DIM
from services.networks import PolicyNetwork


def constant_policy(raw: float, squash: bool = False) -> PolicyNetwork:
    """Policy whose mean action is ``raw`` in every state."""
    policy = PolicyNetwork(OBS_DIM, squash=squash)
    with torch.no_grad():
        for layer in policy.body.layers:
            layer.weight.zero_()
            layer.bias.zero_()
        policy.body.layers[-1].bias.fill_(math.atanh(raw) if squash else raw)
    return policy


@pytest.fixture
def tight_scenario():
    """Default scenario with d1_0 = d2_0 = 7 m: the rear pair collides under full braking."""
    return default_scenario()


@pytest.fixture
def wide_scenario():
    return default_scenario(d1_0=200.0, d2_0=200.0)


@pytest.fixture
def braking_policy():
    return constant_policy(-1.0)


@pytest.fixture
def accelerating_policy():
    return constant_policy(1.0)
