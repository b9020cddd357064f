import numpy as np
import pytest

from shared.models.architecture import Architecture, SelfInteractionRecord
from shared.models.checkpoint import Checkpoint
from shared.utils.errors import IncompatibleCheckpointError, OrderMismatchError
from tfn.autodiff import ParameterStore
from tfn.layers import PointCloud, TensorFieldNetwork
from tfn.tasks import build_tetris_net


def _tetris_inputs(n: int = 4):
    cloud = PointCloud(positions=np.random.default_rng(0).standard_normal((n, 3)))
    return cloud, {0: np.ones((n, 1, 1))}


def test_channel_flow(tetris_model):
    model, _ = tetris_model
    assert model.input_channels == {0: 1}
    assert model.output_channels == {0: 8}
    assert {0: 3, 1: 3} in model.channel_flow


def test_layer_names_carry_their_index(tetris_model):
    model, _ = tetris_model
    assert model.layers[0].name == "00_self_interaction"
    assert model.layers[1].name == "01_convolution"


def test_initialisation_is_seeded(tetris_model):
    model, store = tetris_model
    again = model.init_parameters(0)
    other = model.init_parameters(1)
    assert all(np.array_equal(store[name], again[name]) for name in store)
    assert not np.array_equal(store.flatten(), other.flatten())


def test_forward_output_shape(tetris_model):
    model, store = tetris_model
    outputs = model(store, *_tetris_inputs())
    assert list(outputs) == [0]
    assert outputs[0].shape == (1, 8, 1)


def test_checkpoint_round_trip(tetris_model):
    model, store = tetris_model
    checkpoint = model.to_checkpoint(store, task="tetris", config_hash="abc", metrics={"train_loss": 0.5})
    restored = Checkpoint.model_validate_json(checkpoint.model_dump_json(by_alias=True))
    model_back, store_back = TensorFieldNetwork.from_checkpoint(restored)

    cloud, inputs = _tetris_inputs()
    assert np.array_equal(model(store, cloud, inputs)[0], model_back(store_back, cloud, inputs)[0])
    assert restored.schema_id == "tfn.checkpoint/1"
    assert restored.metrics == {"train_loss": 0.5}


def test_missing_parameter_is_incompatible(tetris_model):
    model, store = tetris_model
    checkpoint = model.to_checkpoint(store, task="tetris")
    broken = checkpoint.model_copy(update={"parameters": checkpoint.parameters[1:]})
    with pytest.raises(IncompatibleCheckpointError):
        TensorFieldNetwork.from_checkpoint(broken)


def test_misshaped_parameter_is_incompatible(tetris_model):
    model, store = tetris_model
    name = store.names()[0]
    arrays = dict(store.items())
    arrays[name] = np.zeros(arrays[name].size + 1)
    with pytest.raises(IncompatibleCheckpointError):
        model.check_parameters(ParameterStore(arrays))


def test_checkpoint_from_another_width_is_rejected(tetris_model):
    model, store = tetris_model
    wider = TensorFieldNetwork(build_tetris_net(channels=4))
    with pytest.raises(IncompatibleCheckpointError):
        wider.check_parameters(store)


def test_inconsistent_architecture_is_rejected():
    architecture = Architecture(
        name="bad",
        input_channels={0: 1},
        layers=[SelfInteractionRecord(channels_in={0: 2}, channels_out={0: 2})],
    )
    with pytest.raises(OrderMismatchError):
        TensorFieldNetwork(architecture)


def test_radial_nets(tetris_model, gravity_model):
    assert len(tetris_model[0].radial_nets()) == 3
    (layer, net), = gravity_model[0].radial_nets()
    assert list(net.blocks) == ["lf1_li0"]
