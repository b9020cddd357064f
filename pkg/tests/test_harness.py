import numpy as np
import pytest

from shared.models.report import EquivarianceReport, ReportBundle, ResidualRecord
from shared.utils.errors import OrderMismatchError
from tfn.harness import (
    MUTATIONS,
    OutputKind,
    Subject,
    check_composition,
    check_group_composition,
    check_permutation,
    check_rotation,
    check_translation,
    identity_subject,
    layer_subjects,
    model_subject,
    mutate_architecture,
    mutate_checkpoint,
    mutate_model,
    random_cloud,
    random_features,
    task_subject,
)
from tfn.layers import TensorFieldNetwork
from tfn.so3 import Rotation
from tfn.tasks import build_tetris_net, get_task

TRIALS = 10

CHECKS = {"rotation": check_rotation, "translation": check_translation, "permutation": check_permutation}


@pytest.fixture
def tetris_inputs():
    return random_cloud(4, seed=11), {0: np.ones((4, 1, 1))}


def test_identity_passes_everything(cloud, features):
    subject = identity_subject()
    for check in CHECKS.values():
        report = check(subject, cloud, features, trials=TRIALS)
        assert report.passed
        assert report.max_residual < 1e-12


def test_identity_rotation_gives_zero_residual(tetris_model, tetris_inputs):
    model, store = tetris_model
    report = check_rotation(model_subject(model, store), *tetris_inputs, rotations=[Rotation.identity()])
    assert report.max_residual == 0.0


def test_random_tetris_network_is_equivariant(tetris_model, tetris_inputs):
    model, store = tetris_model
    subject = model_subject(model, store)
    assert subject.output == OutputKind.POOLED
    for family, check in CHECKS.items():
        report = check(subject, *tetris_inputs, trials=TRIALS)
        assert report.passed, report.summary()
        assert report.family == family


def test_every_layer_and_the_stack_compose(tetris_model, tetris_inputs):
    model, store = tetris_model
    report = check_composition(layer_subjects(model, store), *tetris_inputs, trials=3)
    assert report.passed, report.summary()
    assert report.family == "composition"
    assert not [r for r in report.residuals if r.layer == "composition-bound"]
    assert {r.layer for r in report.residuals} >= {layer.name for layer in model.layers}


def test_broken_stack_fails_composition_at_the_broken_layer(tetris_model, tetris_inputs):
    model, store = tetris_model
    mutated, mutated_store = mutate_model(model, store, "m_dependent")
    _, position = mutate_architecture(model.architecture, "m_dependent")
    report = check_composition(layer_subjects(mutated, mutated_store), *tetris_inputs, trials=3)
    assert not report.passed
    broken = mutated.layers[position].name
    assert max(r.residual for r in report.residuals if r.layer == broken) > report.tolerance
    assert all(r.residual <= report.tolerance for r in report.residuals if r.layer == model.layers[0].name)


def test_group_composition(gravity_model):
    model, store = gravity_model
    cloud = random_cloud(5, seed=2)
    features = {0: np.abs(random_features({0: 1}, 5, seed=2)[0])}
    report = check_group_composition(model_subject(model, store), cloud, features, trials=TRIALS)
    assert report.passed, report.summary()


@pytest.mark.parametrize("kind", sorted(MUTATIONS))
def test_mutations_break_exactly_their_symmetry(tetris_model, tetris_inputs, kind):
    model, store = tetris_model
    mutated, mutated_store = mutate_model(model, store, kind, seed=1)
    subject = model_subject(mutated, mutated_store)
    for family, check in CHECKS.items():
        report = check(subject, *tetris_inputs, trials=TRIALS)
        assert report.passed == (family != MUTATIONS[kind]), (kind, report.summary())


def test_mutation_keeps_original_parameters(tetris_model):
    model, store = tetris_model
    mutated, mutated_store = mutate_model(model, store, "m_dependent", seed=0)
    assert len(mutated.layers) == len(model.layers) + 1
    assert mutated.name == "tetris+m_dependent"
    assert mutated_store.size > store.size
    # The last layer moved up one index but kept its weights.
    last_old, last_new = model.layers[-1].name, mutated.layers[-1].name
    assert np.array_equal(store[f"{last_old}.W0"], mutated_store[f"{last_new}.W0"])


def test_m_dependent_needs_higher_orders(gravity_model):
    model, _ = gravity_model
    architecture, position = mutate_architecture(model.architecture, "m_dependent")
    assert position == 1
    scalars_only = build_tetris_net().model_copy(update={"layers": build_tetris_net().layers[:1]})
    with pytest.raises(ValueError):
        mutate_architecture(scalars_only, "m_dependent")


def test_unknown_mutation():
    with pytest.raises(ValueError):
        mutate_architecture(build_tetris_net(), "nonsense")


def test_mutated_checkpoint_fails_rotation(tetris_model, tetris_inputs):
    model, store = tetris_model
    checkpoint = mutate_checkpoint(model.to_checkpoint(store, task="tetris"), "m_dependent", seed=0)
    mutated, mutated_store = TensorFieldNetwork.from_checkpoint(checkpoint)
    assert not check_rotation(model_subject(mutated, mutated_store), *tetris_inputs, trials=TRIALS).passed


@pytest.mark.parametrize("kind", ["tetris", "gravity", "inertia", "missing-point"])
def test_task_readouts_are_equivariant(kind):
    task = get_task(kind)
    model = task.build_model()
    store = model.init_parameters(0)
    cloud, features = task.encode(task.generate(0, 1)[0])
    subject = task_subject(task, model, store)
    assert subject.output == OutputKind(task.prediction_kind)

    checks = ["rotation", "translation"] + (["permutation"] if task.permutable else [])
    for family in checks:
        report = CHECKS[family](subject, cloud, features, trials=5)
        assert report.passed, (kind, report.summary())


def test_undeclared_output_order_is_reported(cloud, features):
    subject = Subject("sloppy", lambda c, f: {**f, 3: np.zeros((5, 1, 7))}, output_orders=[0, 1, 2])
    with pytest.raises(OrderMismatchError):
        check_rotation(subject, cloud, features, trials=1)


def test_input_orders_are_checked(tetris_model, features, cloud):
    model, store = tetris_model
    with pytest.raises(OrderMismatchError):
        model_subject(model, store)(cloud, features)


def test_report_bundle():
    good = EquivarianceReport(
        family="rotation", subject="net", tolerance=1e-8,
        residuals=[ResidualRecord(layer="net", order=0, trial=0, residual=1e-12)],
    )
    bad = EquivarianceReport(
        family="permutation", subject="net", tolerance=1e-12,
        residuals=[ResidualRecord(layer="net", order=0, trial=0, residual=0.1)],
    )
    assert ReportBundle(subject="net", reports=[good]).passed
    bundle = ReportBundle(subject="net", reports=[good, bad])
    assert not bundle.passed
    assert [row["passed"] for row in bundle.summary()] == [True, False]
    assert '"schema":"tfn.report/1"' in bundle.model_dump_json(by_alias=True)


def test_merge_reports():
    a = EquivarianceReport(family="rotation", subject="a", tolerance=1e-8)
    b = EquivarianceReport(
        family="rotation", subject="b", tolerance=1e-6,
        residuals=[ResidualRecord(layer="b", order=1, trial=0, residual=1e-9)],
    )
    merged = a.merge(b)
    assert merged.subject == "a+b"
    assert merged.tolerance == 1e-8
    assert merged.max_residual == 1e-9
    with pytest.raises(ValueError):
        a.merge(EquivarianceReport(family="translation", subject="a", tolerance=1e-8))
