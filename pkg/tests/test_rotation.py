import numpy as np
import pytest
from pydantic import ValidationError

from shared.utils.errors import InvalidRotationError
from tfn.so3 import Rotation, random_rotations, rotation_from_axis_angle, sample_random_rotation


def test_identity_matrix_is_exact():
    assert np.array_equal(Rotation.identity().matrix(), np.eye(3))


def test_matrices_are_proper_rotations(rotations):
    for rotation in rotations:
        m = rotation.matrix()
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12)


def test_compose_applies_right_operand_first(rotations):
    g, h = rotations[0], rotations[1]
    assert np.allclose(g.compose(h).matrix(), g.matrix() @ h.matrix(), atol=1e-12)
    assert np.allclose((g @ h).matrix(), g.compose(h).matrix(), atol=1e-15)

    point = np.array([0.3, -1.2, 2.0])
    assert np.allclose(g.compose(h).apply(point), g.apply(h.apply(point)), atol=1e-12)


def test_inverse(rotations):
    for rotation in rotations[:10]:
        assert np.allclose(rotation.compose(rotation.inverse()).matrix(), np.eye(3), atol=1e-12)


def test_axis_angle_quarter_turn_about_z():
    rotation = rotation_from_axis_angle([0.0, 0.0, 2.0], np.pi / 2)
    assert np.allclose(rotation.apply([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)


def test_from_matrix_recovers_the_rotation(rotations):
    for rotation in rotations[:20]:
        assert np.allclose(Rotation.from_matrix(rotation.matrix()).matrix(), rotation.matrix(), atol=1e-12)


def test_random_rotation_is_seeded():
    assert sample_random_rotation(5) == sample_random_rotation(5)
    assert sample_random_rotation(5) != sample_random_rotation(6)
    first, second = random_rotations(3, seed=1), random_rotations(3, seed=1)
    assert first == second


def test_apply_keeps_leading_axes():
    points = np.ones((4, 2, 3))
    assert Rotation.random(0).apply(points).shape == (4, 2, 3)


@pytest.mark.parametrize(
    "build",
    [
        lambda: Rotation.from_axis_angle([0.0, 0.0, 0.0], 1.0),
        lambda: Rotation.from_quaternion([0.0, 0.0, 0.0, 0.0]),
        lambda: Rotation.from_quaternion([1.0, np.nan, 0.0, 0.0]),
        lambda: Rotation.from_matrix(np.diag([1.0, 1.0, -1.0])),
    ],
)
def test_invalid_rotations_raise(build):
    with pytest.raises(InvalidRotationError):
        build()


def test_non_unit_quaternion_is_rejected():
    with pytest.raises(ValidationError):
        Rotation(w=2.0, x=0.0, y=0.0, z=0.0)
