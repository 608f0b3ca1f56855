"""Shared fixtures: the shipped UR10e model, its pad layout and a seeded RNG."""

import numpy as np
import pytest

from skinsafe import load_config


@pytest.fixture(scope="session")
def model_and_pads():
    return load_config()


@pytest.fixture(scope="session")
def model(model_and_pads):
    return model_and_pads[0]


@pytest.fixture(scope="session")
def pads(model_and_pads):
    return model_and_pads[1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_configurations(rng, n, n_runs=100):
    """Joint positions in [-pi, pi] and velocities in [-2, 2] rad/s."""
    qs = rng.uniform(-np.pi, np.pi, size=(n_runs, n))
    qds = rng.uniform(-2.0, 2.0, size=(n_runs, n))
    return qs, qds
