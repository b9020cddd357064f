import numpy as np
import pytest

from shared.models.sample import TaskKind
from shared.utils.config import RunConfig
from shared.utils.errors import ConfigError
from tfn.autodiff import Tape
from tfn.layers import FeatureMap
from tfn.so3 import spherical_harmonics_masked
from tfn.tasks import (
    MIRROR_PAIR,
    TETRIS_SHAPES,
    GravityTask,
    InertiaTask,
    MissingPointTask,
    TetrisTask,
    fit_scale,
    gen_gravity,
    gen_inertia,
    gen_missing_point,
    gen_tetris,
    get_task,
    gravity_field,
    gravity_oracle,
    inertia_oracle,
    inertia_tensor,
    missing_point_toy,
    radial_recovery_error,
    tetris_mirror_distances,
)
from tfn.tasks.missing_point import missing_point_case, missing_point_inputs


def _pair_vectors(positions: np.ndarray):
    vectors = positions[:, None, :] - positions[None, :, :]
    distances = np.linalg.norm(vectors, axis=-1)
    return vectors, distances


def test_canonical_tetris_shapes():
    samples = gen_tetris()
    assert [s.target for s in samples] == list(range(8))
    for sample, shape in zip(samples, TETRIS_SHAPES):
        assert np.array_equal(sample.positions_array(), shape)


def test_mirror_shapes_share_pair_distances():
    left, right = tetris_mirror_distances()
    assert np.allclose(left, right)
    assert MIRROR_PAIR == (2, 3)


def test_rotated_tetris_keeps_pair_distances():
    canonical = gen_tetris()
    moved = gen_tetris(rotate=True, translate=True, seed=5)
    for a, b in zip(canonical, moved):
        assert np.allclose(_pair_vectors(a.positions_array())[1], _pair_vectors(b.positions_array())[1])


@pytest.mark.parametrize("kind", [k.value for k in TaskKind])
def test_generation_is_deterministic(kind):
    task = get_task(kind)
    first = task.generate(3, 4)
    again = task.generate(3, 4)
    assert [s.model_dump_json() for s in first] == [s.model_dump_json() for s in again]
    # Sample i depends only on (seed, i).
    assert task.generate(3, 2, start=2)[1].model_dump_json() == first[3].model_dump_json()


def test_gravity_field_matches_oracle():
    for index in range(5):
        sample = gen_gravity(0, index)
        positions, masses = sample.positions_array(), sample.masses_array()
        assert np.allclose(gravity_field(positions, masses), gravity_oracle(positions, masses), rtol=1e-12)
        assert np.allclose(sample.target_array(), gravity_oracle(positions, masses))


def test_gravity_is_attractive():
    field = gravity_field(np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]), np.array([1.0, 1.0]))
    assert np.allclose(field, [[0.25, 0.0, 0.0], [-0.25, 0.0, 0.0]])


def test_inertia_tensor_matches_oracle():
    for index in range(5):
        sample = gen_inertia(0, index)
        args = sample.positions_array(), sample.masses_array(), np.asarray(sample.query_point)
        tensor = inertia_tensor(*args)
        assert np.allclose(tensor, inertia_oracle(*args), rtol=1e-12)
        assert np.allclose(tensor, tensor.T)


def test_missing_point_cases():
    samples = gen_missing_point()
    assert len(samples) == 32
    assert missing_point_case(0) == (0, 0)
    assert missing_point_case(13) == (3, 1)
    assert missing_point_case(33) == (0, 1)
    sample = samples[13]
    assert sample.shape_class == 3
    assert sample.types == [0, 2, 3]
    assert np.array_equal(sample.target.position, TETRIS_SHAPES[3][1])


def test_missing_point_inputs_are_one_hot():
    sample = gen_missing_point()[13]
    inputs = missing_point_inputs(sample)
    assert inputs.shape == (3, 12, 1)
    assert np.array_equal(inputs[:, :8, 0].sum(axis=1), np.ones(3))
    assert np.all(inputs[:, 3, 0] == 1.0)
    assert np.array_equal(np.argmax(inputs[:, 8:, 0], axis=1), [0, 2, 3])


def test_missing_point_toy():
    samples, model, store = missing_point_toy(channels=4)
    assert len(samples) == 32
    model.check_parameters(store)


def test_gravity_readout_is_exact_for_ideal_radial():
    """A 0 -> 1 convolution with R(r) = -1/r^2 reproduces the field."""
    task = GravityTask()
    sample = gen_gravity(1, 0)
    cloud, inputs = task.encode(sample)
    vectors, distances = _pair_vectors(cloud.positions)
    np.fill_diagonal(distances, np.inf)
    radial = -1.0 / distances**2
    conv = np.einsum("ab,abm,b->am", radial, spherical_harmonics_masked(1, vectors), cloud.masses)
    outputs = FeatureMap.from_arrays(Tape(), {1: conv[:, None, :]})
    prediction = task.readout(outputs, cloud).value
    assert np.allclose(prediction, sample.target_array(), atol=1e-12)


def test_inertia_readout_is_exact_for_ideal_radials():
    """Filters (2/3) r^2 and -r^2 read at the query point give the tensor."""
    task = InertiaTask()
    sample = gen_inertia(1, 0)
    cloud, inputs = task.encode(sample)
    vectors, distances = _pair_vectors(cloud.positions)
    arrays = {}
    for l, curve in ((0, lambda r: (2.0 / 3.0) * r**2), (2, lambda r: -(r**2))):
        arrays[l] = np.einsum(
            "ab,abm,b->am", curve(distances), spherical_harmonics_masked(l, vectors), cloud.masses
        )[:, None, :]
    prediction = task.readout(FeatureMap.from_arrays(Tape(), arrays), cloud).value
    assert np.allclose(prediction, sample.target_array(), atol=1e-12)


def test_analytic_radials():
    r = np.array([0.5, 1.0, 2.0])
    assert np.allclose(GravityTask().analytic_radials()["lf1_li0"](r), [-4.0, -1.0, -0.25])
    curves = InertiaTask().analytic_radials()
    assert np.allclose(curves["lf0_li0"](r), (2.0 / 3.0) * r**2)
    assert np.allclose(curves["lf2_li0"](r), -(r**2))
    assert TetrisTask().analytic_radials() == {}


def test_recovery_ranges(make_task):
    assert GravityTask().recovery_range() == (0.6, 2.0)
    low, high = make_task("inertia").recovery_range()
    assert 0.0 < low < high <= np.sqrt(3.0)


def test_radial_recovery_after_scale_fit():
    analytic = lambda r: -1.0 / r**2
    error, scale = radial_recovery_error(lambda r: 3.0 / r**2, analytic, 0.6, 2.0)
    assert error == pytest.approx(0.0, abs=1e-12)
    assert scale == pytest.approx(-1.0 / 3.0)
    with pytest.raises(ValueError):
        radial_recovery_error(analytic, analytic, 2.0, 1.0)


def test_fit_scale_of_zero_curve():
    assert fit_scale(np.zeros(4), np.ones(4)) == 0.0


def test_tetris_score_reports_mirror_accuracy():
    samples = gen_tetris()
    predictions = [np.eye(8)[label] for label in [0, 1, 3, 3, 4, 5, 6, 7]]
    metrics = TetrisTask().score(predictions, samples)
    assert metrics["accuracy"] == pytest.approx(7 / 8)
    assert metrics["mirror_accuracy"] == pytest.approx(0.5)


def test_gravity_score():
    samples = [gen_gravity(0, i) for i in range(3)]
    perfect = GravityTask().score([s.target_array() for s in samples], samples)
    assert perfect["mae"] == 0.0
    assert perfect["relative_mae"] == 0.0
    assert perfect["target_rms"] > 0.0


def test_missing_point_score():
    samples = gen_missing_point(count=2)
    predictions = [
        np.concatenate([samples[0].target_array(), np.eye(4)[samples[0].target.type]]),
        np.concatenate([samples[1].target_array() + 1.0, np.eye(4)[0]]),
    ]
    metrics = MissingPointTask().score(predictions, samples)
    assert metrics["hit_rate"] == 0.5
    assert metrics["type_accuracy"] == 0.5
    assert metrics["distance_mae"] == pytest.approx(np.sqrt(3.0) / 2.0)


def test_unknown_task_is_a_config_error():
    with pytest.raises(ConfigError):
        get_task("pentris")


def test_task_rejects_config_of_another_task():
    with pytest.raises(ConfigError):
        TetrisTask(RunConfig(task="gravity"))


def test_test_samples_follow_the_training_stream(make_task):
    task = make_task("gravity")
    train = task.train_samples()
    test = task.test_samples()
    assert [s.index for s in train] == [0, 1, 2, 3]
    assert [s.index for s in test] == [4, 5]


@pytest.mark.parametrize("kind", [k.value for k in TaskKind])
def test_loss_is_scalar_and_finite(kind, make_task):
    task = make_task(kind)
    model = task.build_model()
    store = model.init_parameters(0)
    sample = task.train_samples()[0]
    tape = Tape()
    prediction = task.forward(model, store.bind(tape), sample, tape)
    loss = task.loss(prediction, sample)
    assert loss.value.shape == ()
    assert np.isfinite(loss.value)
    grads = tape.backward(loss)
    assert set(grads) == set(store.names())
