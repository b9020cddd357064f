import numpy as np
import pytest

from shared.utils.errors import NonScalarLossError, ShapeMismatchError
from tfn.autodiff import ParameterStore, Tape, backward, numerical_gradient, ops
from tfn.layers import FeatureMap, PointCloud, TensorFieldNetwork
from tfn.tasks import build_tetris_net

GRADIENT_TOLERANCE = 1e-6


def _relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale)


def _check_gradient(op, x: np.ndarray, seed: int = 0):
    """Compare the tape gradient of sum(w * op(x)) with central differences."""
    tape = Tape()
    node = tape.parameter("x", x)
    out = op(node)
    weights = np.random.default_rng(seed).standard_normal(out.shape)
    grad = tape.backward(ops.sum(ops.multiply(out, weights)))["x"]

    def value(array):
        t = Tape()
        return float(np.sum(op(t.parameter("x", array)).value * weights))

    numeric = numerical_gradient(value, x)
    assert _relative_error(grad, numeric) < GRADIENT_TOLERANCE


@pytest.mark.parametrize(
    "op",
    [
        lambda x: ops.add(x, np.arange(4.0)),
        lambda x: ops.subtract(np.ones((3, 4)), x),
        lambda x: -x,
        lambda x: ops.multiply(x, x),
        lambda x: ops.multiply(x, np.linspace(-1.0, 1.0, 4)),
        lambda x: ops.matmul(x, ops.transpose(x)),
        lambda x: ops.contract("ij,kj->ik", x, x),
        lambda x: ops.contract("ij->j", x),
        lambda x: ops.contract("ij,ij->", x, x),
        lambda x: ops.gather(x, [2, 0, 2], axis=0),
        lambda x: ops.gather(x, [1, 3], axis=1),
        lambda x: ops.scatter_add(x, [1, 0, 1], size=2, axis=0),
        lambda x: ops.sum(x, axis=1, keepdims=True),
        lambda x: ops.mean(x, axis=0),
        lambda x: ops.mean(x, axis=(0, 1)),
        lambda x: ops.reshape(x, (2, 6)),
        lambda x: ops.transpose(x),
        lambda x: ops.concat([x, ops.square(x)], axis=1),
        lambda x: ops.square(x),
        lambda x: ops.exp(x),
        lambda x: ops.tanh(x),
        lambda x: ops.shifted_softplus(x),
        lambda x: ops.softmax(x, axis=1),
        lambda x: ops.log_softmax(x, axis=0),
        lambda x: ops.sqrt(ops.square(x) + 1.0),
    ],
)
def test_op_gradients(op, rng):
    _check_gradient(op, rng.standard_normal((3, 4)))


def test_operator_overloads_record_on_the_tape():
    tape = Tape()
    x = tape.parameter("x", np.array([1.0, 2.0]))
    y = 2.0 * x - 1.0 + x * x
    assert np.allclose(y.value, [2.0, 7.0])
    assert np.allclose(tape.backward(ops.sum(y))["x"], [4.0, 6.0])


def test_gradients_accumulate_over_reuse():
    tape = Tape()
    x = tape.parameter("x", np.array(3.0))
    loss = x * x + x * x * x
    assert tape.backward(loss)["x"] == pytest.approx(2 * 3.0 + 3 * 9.0)


def test_unused_parameters_get_zero_gradient():
    tape = Tape()
    x = tape.parameter("x", np.ones(2))
    tape.parameter("unused", np.ones((2, 2)))
    grads = backward(tape, ops.sum(x))
    assert np.array_equal(grads["unused"], np.zeros((2, 2)))


def test_constants_do_not_receive_gradients():
    tape = Tape()
    x = tape.parameter("x", np.ones(3))
    c = tape.constant(np.arange(3.0))
    tape.backward(ops.sum(x * c))
    assert tape.entries[c.id].vjp is None


def test_non_scalar_loss_is_rejected():
    tape = Tape()
    x = tape.parameter("x", np.ones(3))
    with pytest.raises(NonScalarLossError):
        tape.backward(x)


def test_duplicate_parameter_is_rejected():
    tape = Tape()
    tape.parameter("x", np.ones(1))
    with pytest.raises(ValueError):
        tape.parameter("x", np.ones(1))


def test_nodes_of_other_tapes_are_rejected():
    a = Tape().constant(np.ones(2))
    b = Tape().constant(np.ones(2))
    with pytest.raises(ValueError):
        ops.add(a, b)


@pytest.mark.parametrize(
    "build",
    [
        lambda t: ops.add(t.constant(np.ones(3)), t.constant(np.ones(4))),
        lambda t: ops.matmul(t.constant(np.ones((2, 3))), t.constant(np.ones((2, 3)))),
        lambda t: ops.contract("ij,jk->ik", t.constant(np.ones((2, 3))), t.constant(np.ones((4, 2)))),
        lambda t: ops.reshape(t.constant(np.ones(5)), (2, 3)),
        lambda t: ops.gather(t.constant(np.ones(3)), [5]),
    ],
)
def test_shape_errors(build):
    with pytest.raises(ShapeMismatchError):
        build(Tape())


def test_full_network_directional_derivative():
    """d/dh L(p + h d) at h = 0 against grad(L) . d for the Tetris network."""
    model = TensorFieldNetwork(build_tetris_net(channels=2))
    store = model.init_parameters(3)
    rng = np.random.default_rng(5)
    cloud = PointCloud(positions=rng.standard_normal((4, 3)))
    inputs = {0: np.ones((4, 1, 1))}
    weights = rng.standard_normal(8)

    def loss(params: ParameterStore) -> float:
        return float(model(params, cloud, inputs)[0].reshape(-1) @ weights)

    tape = Tape()
    outputs = model.forward(store.bind(tape), cloud, FeatureMap.from_arrays(tape, inputs))
    grads = tape.backward(ops.contract("k,k->", ops.reshape(outputs[0], (8,)), weights))
    flat_grad = np.concatenate([grads[name].ravel() for name in store.names()])

    direction = rng.standard_normal(store.size)
    direction /= np.linalg.norm(direction)
    base = store.flatten()
    h = 1e-5
    numeric = (loss(store.unflatten(base + h * direction)) - loss(store.unflatten(base - h * direction))) / (2 * h)
    analytic = float(flat_grad @ direction)
    assert abs(numeric - analytic) / max(abs(analytic), 1e-12) < 1e-4
