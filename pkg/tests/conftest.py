import numpy as np
import pytest

from qhkit.domains import Ball, HalfSpace, PuncturedBall, SlitDisk
from qhkit.paths import build_path_graph


@pytest.fixture(scope="session")
def halfspace():
    return HalfSpace(axis=1, offset=0.0, window=([-2.0, 0.0], [2.0, 3.0]))


@pytest.fixture(scope="session")
def unit_ball():
    return Ball([0.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def punctured_ball():
    return PuncturedBall([0.0, 0.0], 1.0, [0.0, 0.0])


@pytest.fixture(scope="session")
def slit_disk():
    return SlitDisk([0.0, 0.0], 1.0, ([0.0, 0.0], [1.0, 0.0]))


@pytest.fixture(scope="session")
def halfspace_graph(halfspace):
    return build_path_graph(halfspace, 0.05)


@pytest.fixture(scope="session")
def ball_graph(unit_ball):
    return build_path_graph(unit_ball, 0.05)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
