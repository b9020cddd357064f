import numpy as np
import pytest

from shared.utils.config import RunConfig
from tfn.harness import random_cloud, random_features
from tfn.layers import TensorFieldNetwork
from tfn.so3 import clebsch_gordan_table, random_rotations
from tfn.tasks import build_gravity_net, build_inertia_net, build_tetris_net, get_task


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def cg_table():
    return clebsch_gordan_table(2)


@pytest.fixture(scope="session")
def rotations():
    return random_rotations(100, seed=7)


@pytest.fixture
def cloud():
    return random_cloud(5, seed=3)


@pytest.fixture
def features():
    return random_features({0: 2, 1: 2, 2: 1}, 5, seed=4)


@pytest.fixture
def tetris_model():
    model = TensorFieldNetwork(build_tetris_net(channels=3))
    return model, model.init_parameters(0)


@pytest.fixture
def gravity_model():
    model = TensorFieldNetwork(build_gravity_net())
    return model, model.init_parameters(0)


@pytest.fixture
def inertia_model():
    model = TensorFieldNetwork(build_inertia_net())
    return model, model.init_parameters(0)


@pytest.fixture
def small_config():
    """Overrides that keep a training run to a few seconds."""

    def make(task: str, **overrides) -> RunConfig:
        values = {"task": task, "epochs": 1, "train_count": 4, "test_count": 2}
        values.update(overrides)
        return RunConfig(**values)

    return make


@pytest.fixture
def make_task(small_config):
    def make(task: str, **overrides):
        return get_task(task, small_config(task, **overrides))

    return make
