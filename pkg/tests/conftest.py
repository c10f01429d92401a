import math

import pytest

from wvamp.quantum import plus_state, state_from_angles

PI = math.pi


@pytest.fixture
def plus():
    return plus_state()


@pytest.fixture
def fig5_post():
    return state_from_angles(1.49 * PI, PI / 4)


def fig1_post(theta_over_pi, phi=0.0):
    return state_from_angles(theta_over_pi * PI, phi)
