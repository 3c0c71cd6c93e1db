import os
import sys

# Add the parent directory to the path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from Services.Probability.finite_distributions import ContextSpace, JointDistribution

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config", "experiments")


@pytest.fixture
def example1_q():
    """TV(Q0, Q1) = 0.5 on two contexts"""
    return JointDistribution(np.array([[0.375, 0.125], [0.125, 0.375]]), ContextSpace(("x0", "x1"), 2))


@pytest.fixture
def pareto_q():
    """Q0 = (.5, .5, 0), Q1 = (0, .5, .5), gamma = (.5, .5)"""
    return JointDistribution.from_conditionals([0.5, 0.5], [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])


@pytest.fixture
def config_path():
    def resolve(name: str) -> str:
        return os.path.join(CONFIG_DIR, f"{name}.json")
    return resolve
