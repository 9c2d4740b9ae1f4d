import math

import pytest

from typer.testing import CliRunner

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core.models import PointCloud, ProbabilityVector, RnifsSystem
from src.repository.maps import lookup, make_similitude
from src.services.system import generate_orbit


CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")

TRIANGLE = ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0))


def sierpinski_system() -> RnifsSystem:
    return RnifsSystem(tuple(lookup(m) for m in ("sier1", "sier2", "sier3")), ProbabilityVector.uniform(3))


def extended_system() -> RnifsSystem:
    return RnifsSystem(tuple(lookup(m) for m in ("sier1", "sier2", "sier3", "sier_nl")), ProbabilityVector.uniform(4))


def expanding_system() -> RnifsSystem:
    return RnifsSystem((make_similitude("grow", 1.5), make_similitude("shrink", 0.5)), ProbabilityVector((0.9, 0.1)))


@pytest.fixture(scope="module")
def sierpinski():
    return sierpinski_system()


@pytest.fixture(scope="module")
def sierpinski_cloud() -> PointCloud:
    return generate_orbit(sierpinski_system(), (0.1, 0.1), 100_000, 100, 42)


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture()
def small_config():
    return {
        "name": "small_sierpinski",
        "map_ids": ["sier1", "sier2", "sier3"],
        "probs": "uniform",
        "iterations": 20000,
        "burn_in": 100,
        "seed": 7,
        "outputs": ["points", "density", "scatter", "boxdim", "stability"],
    }


@pytest.fixture()
def diverging_config():
    return {
        "name": "runaway",
        "map_ids": ["f10"],
        "probs": [1.0],
        "iterations": 5000,
        "burn_in": 10,
        "seed": 1,
        "x0": [5.0, 5.0],
    }
