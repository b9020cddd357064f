import numpy as np
import pytest

from shared.models.architecture import FilterSpec, RadialConfig
from shared.utils.errors import OrderMismatchError, ShapeMismatchError
from tfn.autodiff import Tape
from tfn.harness import DEFAULT_TRIALS, check_permutation, check_rotation, check_translation, layer_subject
from tfn.layers import (
    Convolution,
    FeatureMap,
    GlobalPool,
    Nonlinearity,
    PairGeometry,
    PointCloud,
    SelectOrders,
    SelfInteraction,
    admissible_outputs,
    concat_features,
    filter_eval,
    gaussian_basis,
    radial_eval,
    vote_aggregate,
)
from tfn.so3 import Rotation

TRIALS = 10

PATHS = [
    FilterSpec(l_i=0, l_f=0, l_o=0, channels=2),
    FilterSpec(l_i=0, l_f=1, l_o=1, channels=2),
    FilterSpec(l_i=1, l_f=0, l_o=1, channels=2),
    FilterSpec(l_i=1, l_f=1, l_o=0, channels=2),
    FilterSpec(l_i=1, l_f=1, l_o=1, channels=2),
    FilterSpec(l_i=1, l_f=1, l_o=2, channels=2),
    FilterSpec(l_i=2, l_f=1, l_o=1, channels=1),
    FilterSpec(l_i=2, l_f=2, l_o=0, channels=1),
]


@pytest.fixture
def convolution():
    layer = Convolution("conv", PATHS, RadialConfig(r_max=3.0))
    return layer, layer.init_parameters(np.random.default_rng(0))


def _assert_symmetric(subject, cloud, features, trials=TRIALS):
    for check in (check_rotation, check_translation, check_permutation):
        report = check(subject, cloud, features, trials=trials)
        assert report.passed, report.summary()


def test_convolution_output_channels(convolution):
    layer, _ = convolution
    assert layer.output_channels({0: 2, 1: 2, 2: 1}) == {0: 5, 1: 7, 2: 2}


def test_convolution_is_equivariant(convolution, cloud, features):
    layer, params = convolution
    _assert_symmetric(layer_subject(layer, params), cloud, features, trials=DEFAULT_TRIALS)


def test_self_interaction_is_equivariant(cloud, features):
    layer = SelfInteraction("si", {0: 2, 1: 2, 2: 1}, {0: 3, 1: 1, 2: 4})
    params = layer.init_parameters(np.random.default_rng(1))
    assert set(params) == {"si.W0", "si.W1", "si.W2", "si.b0"}
    _assert_symmetric(layer_subject(layer, params), cloud, features, trials=DEFAULT_TRIALS)


def test_nonlinearity_is_equivariant(cloud, features, rng):
    layer = Nonlinearity("nl", {0: 2, 1: 2, 2: 1}, activations={0: "tanh"})
    params = {name: rng.standard_normal(shape) for name, shape in layer.parameter_shapes().items()}
    _assert_symmetric(layer_subject(layer, params), cloud, features)


def test_pooling_is_invariant_to_point_order(cloud, features):
    subject = layer_subject(GlobalPool("pool"), {})
    for check in (check_rotation, check_permutation):
        assert check(subject, cloud, features, trials=TRIALS).passed
    assert subject(cloud, features)[1].shape == (1, 2, 3)


def test_select_orders(cloud, features):
    layer = SelectOrders("select", [0, 2])
    assert layer.output_channels({0: 2, 1: 2, 2: 1}) == {0: 2, 2: 1}
    outputs = layer_subject(layer, {})(cloud, features)
    assert sorted(outputs) == [0, 2]
    with pytest.raises(OrderMismatchError):
        layer.output_channels({0: 2})


def test_admissible_outputs():
    assert admissible_outputs(1, 1) == [0, 1, 2]
    assert admissible_outputs(2, 0) == [2]


def test_path_channel_mismatch_is_reported(convolution):
    layer, _ = convolution
    with pytest.raises(OrderMismatchError):
        layer.output_channels({0: 2, 1: 3, 2: 1})
    with pytest.raises(OrderMismatchError):
        layer.output_channels({0: 2, 1: 2})


def test_shared_radial_keys_need_equal_widths():
    with pytest.raises(OrderMismatchError):
        Convolution(
            "conv",
            [FilterSpec(l_i=1, l_f=1, l_o=0, channels=2), FilterSpec(l_i=1, l_f=1, l_o=1, channels=3)],
            RadialConfig(),
        )


def test_filter_at_zero_displacement(convolution):
    layer, params = convolution
    spec = PATHS[1]
    assert np.array_equal(filter_eval(spec, layer.net, params, np.zeros(3)), np.zeros((2, 3)))
    scalar = filter_eval(PATHS[0], layer.net, params, np.zeros(3))
    expected = radial_eval(layer.net, params, 0.0, key=PATHS[0].radial_key) / np.sqrt(4.0 * np.pi)
    assert np.allclose(scalar[:, 0], expected)


def test_gaussian_basis_peaks_at_centers():
    config = RadialConfig(count=5, r_min=0.0, r_max=2.0)
    values = gaussian_basis(np.array([0.5]), config)
    assert values.shape == (1, 5)
    assert np.argmax(values[0]) == 1
    assert values[0, 1] == pytest.approx(1.0)


def test_radial_eval_rejects_negative_distances(convolution):
    layer, params = convolution
    with pytest.raises(ValueError):
        radial_eval(layer.net, params, -1.0)


def test_cutoff_isolates_distant_points(rng):
    layer = Convolution(
        "conv", [FilterSpec(l_i=0, l_f=1, l_o=1, channels=1)], RadialConfig(r_max=3.0, cutoff=1.0)
    )
    params = layer.init_parameters(rng)
    subject = layer_subject(layer, params)
    cloud = PointCloud(positions=[[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [10.0, 0.0, 0.0]])
    first = subject(cloud, {0: np.array([[[1.0]], [[1.0]], [[1.0]]])})
    second = subject(cloud, {0: np.array([[[1.0]], [[1.0]], [[5.0]]])})
    assert np.array_equal(first[1][0], second[1][0])
    assert np.array_equal(first[1][2], np.zeros((1, 3)))


def test_feature_map_validation():
    tape = Tape()
    with pytest.raises(ShapeMismatchError):
        FeatureMap({1: tape.constant(np.zeros((2, 1, 2)))})
    with pytest.raises(ShapeMismatchError):
        FeatureMap({0: tape.constant(np.zeros((2, 1, 1))), 1: tape.constant(np.zeros((3, 1, 3)))})
    with pytest.raises(OrderMismatchError):
        FeatureMap({})
    fm = FeatureMap.from_arrays(tape, {0: np.zeros((2, 1, 1))})
    with pytest.raises(OrderMismatchError):
        fm[1]


def test_concat_features():
    tape = Tape()
    a = FeatureMap.from_arrays(tape, {0: np.zeros((2, 1, 1)), 1: np.zeros((2, 2, 3))})
    b = FeatureMap.from_arrays(tape, {0: np.ones((2, 3, 1))})
    assert concat_features([a, b]).channels() == {0: 4, 1: 2}


def test_pair_geometry_includes_self_pairs():
    geometry = PairGeometry(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    assert np.array_equal(geometry.distances, [[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(geometry.vectors[1, 0], [1.0, 0.0, 0.0])
    assert np.array_equal(geometry.harmonics(1)[0, 0], np.zeros(3))


def test_point_cloud_validation():
    with pytest.raises(ValueError):
        PointCloud(positions=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        PointCloud(positions=np.zeros((3, 3)), masses=np.ones(2))


def test_point_cloud_accepts_plain_lists():
    cloud = PointCloud(positions=[[0, 0, 0], [1, 0, 0]], masses=[1, 2], types=[3, 0])
    assert cloud.positions.dtype == np.float64
    assert cloud.masses.dtype == np.float64
    assert cloud.types.dtype == np.int64
    assert np.array_equal(cloud.types, [3, 0])
    assert np.array_equal(cloud.permuted([1, 0]).types, [0, 3])


def test_vote_follows_rotations_and_translations(rng):
    positions = rng.standard_normal((4, 3))
    logits = rng.standard_normal(4)
    displacements = rng.standard_normal((4, 3))
    vote = vote_aggregate(logits, displacements, positions).value

    shift = np.array([1.0, -2.0, 3.0])
    assert np.allclose(vote_aggregate(logits, displacements, positions + shift).value, vote + shift, atol=1e-12)

    rotation = Rotation.random(2)
    rotated = vote_aggregate(logits, rotation.apply(displacements), rotation.apply(positions)).value
    assert np.allclose(rotated, rotation.apply(vote), atol=1e-8)


def test_vote_with_uniform_logits_is_the_mean():
    positions = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    vote = vote_aggregate(np.zeros(2), np.zeros((2, 3)), positions).value
    assert np.allclose(vote, [1.0, 0.0, 0.0])


def test_vote_shape_errors():
    with pytest.raises(ShapeMismatchError):
        vote_aggregate(np.zeros(3), np.zeros((2, 3)), np.zeros((2, 3)))
