"""
Shared pytest fixtures: generators, a one-link pendulum and random chains.
"""

import numpy as np
import pytest

from scandyn.robot_model import ChainModel, LinkSpec, make_generator, random_chain
from scandyn.se3_core import RigidTransform, SpatialInertia, TwistVector

PENDULUM_MASS = 2.0
PENDULUM_LENGTH = 0.75


@pytest.fixture
def rng() -> np.random.Generator:
    return make_generator(1234)


@pytest.fixture
def pendulum() -> ChainModel:
    """Point mass on a massless rod, revolute about the base z axis."""
    link = LinkSpec(
        home_transform=RigidTransform.identity(),
        joint_twist=TwistVector(np.zeros(3), np.array([0.0, 0.0, 1.0])),
        inertia=SpatialInertia.point_mass(PENDULUM_MASS, [PENDULUM_LENGTH, 0.0, 0.0]),
    )
    return ChainModel((link,))


@pytest.fixture(params=[1, 2, 10, 64])
def chain(request) -> ChainModel:
    return random_chain(request.param, seed=request.param)
