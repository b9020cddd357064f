"""
Differentiable operations on tape nodes.

Every function accepts nodes or plain arrays (lifted to constants on the tape
of the first node argument), computes the forward value with numpy and
records a vector-Jacobian product. Shape errors raise ShapeMismatchError
carrying every operand shape.
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, log_softmax as _log_softmax, softmax as _softmax

from shared.utils.errors import ShapeMismatchError

from .tape import Node, Tape

Operand = Union[Node, np.ndarray, float, int]
Axis = Optional[Union[int, Tuple[int, ...]]]

LN2 = float(np.log(2.0))


def _tape_of(*operands) -> Tape:
    for operand in operands:
        if isinstance(operand, Node):
            return operand.tape
    raise TypeError("at least one operand must be a tape node")


def _lift_all(*operands) -> List[Node]:
    tape = _tape_of(*operands)
    return [tape.lift(operand) for operand in operands]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast cotangent back down to ``shape``."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, extent in enumerate(shape) if extent == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _check_broadcast(op: str, a: Node, b: Node) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatchError(f"{op}: operands do not broadcast", a.shape, b.shape) from None


# Elementwise arithmetic


def add(a: Operand, b: Operand) -> Node:
    a, b = _lift_all(a, b)
    _check_broadcast("add", a, b)

    def vjp(g):
        return (
            _unbroadcast(g, a.shape) if a.requires_grad else None,
            _unbroadcast(g, b.shape) if b.requires_grad else None,
        )

    return a.tape.record("add", a.value + b.value, (a, b), vjp)


def subtract(a: Operand, b: Operand) -> Node:
    a, b = _lift_all(a, b)
    _check_broadcast("subtract", a, b)

    def vjp(g):
        return (
            _unbroadcast(g, a.shape) if a.requires_grad else None,
            -_unbroadcast(g, b.shape) if b.requires_grad else None,
        )

    return a.tape.record("subtract", a.value - b.value, (a, b), vjp)


def negate(a: Node) -> Node:
    return a.tape.record("negate", -a.value, (a,), lambda g: (-g,))


def multiply(a: Operand, b: Operand) -> Node:
    a, b = _lift_all(a, b)
    _check_broadcast("multiply", a, b)

    def vjp(g):
        return (
            _unbroadcast(g * b.value, a.shape) if a.requires_grad else None,
            _unbroadcast(g * a.value, b.shape) if b.requires_grad else None,
        )

    return a.tape.record("multiply", a.value * b.value, (a, b), vjp)


# Linear algebra


def matmul(a: Operand, b: Operand) -> Node:
    """numpy.matmul semantics, including 1-D operands and batch broadcasting."""
    a, b = _lift_all(a, b)
    try:
        value = np.matmul(a.value, b.value)
    except ValueError:
        raise ShapeMismatchError("matmul: inner dimensions differ", a.shape, b.shape) from None

    a2 = a.value if a.ndim > 1 else a.value[None, :]
    b2 = b.value if b.ndim > 1 else b.value[:, None]

    def vjp(g):
        g2 = g.reshape(np.matmul(a2, b2).shape)
        ga = gb = None
        if a.requires_grad:
            ga = _unbroadcast(np.matmul(g2, np.swapaxes(b2, -1, -2)), a2.shape).reshape(a.shape)
        if b.requires_grad:
            gb = _unbroadcast(np.matmul(np.swapaxes(a2, -1, -2), g2), b2.shape).reshape(b.shape)
        return ga, gb

    return a.tape.record("matmul", value, (a, b), vjp)


def _parse_subscripts(subscripts: str, count: int) -> Tuple[List[str], str]:
    if "->" not in subscripts:
        raise ValueError(f"contraction needs an explicit output, got '{subscripts}'")
    if "." in subscripts:
        raise ValueError("ellipsis is not supported in contractions")
    left, output = subscripts.replace(" ", "").split("->")
    terms = left.split(",")
    if len(terms) != count:
        raise ValueError(f"'{subscripts}' names {len(terms)} operands, got {count}")
    for term in terms + [output]:
        if len(set(term)) != len(term):
            raise ValueError(f"repeated index in '{term}' is not supported")
    if not set(output) <= set("".join(terms)):
        raise ValueError(f"output indices of '{subscripts}' do not appear in any operand")
    return terms, output


def contract(subscripts: str, *operands: Operand) -> Node:
    """
    Tensor contraction over named axes (einsum notation, explicit output).

    Indices absent from the output are summed; an index shared by several
    operands must have the same extent in each.

    Example:
        contract("i,i->", u, v) is the dot product of u and v
    """
    nodes = _lift_all(*operands)
    terms, output = _parse_subscripts(subscripts, len(nodes))

    extents = {}
    for term, node in zip(terms, nodes):
        if len(term) != node.ndim:
            raise ShapeMismatchError(
                f"contract '{subscripts}': operand rank differs from '{term}'",
                *[n.shape for n in nodes],
            )
        for index, extent in zip(term, node.shape):
            if extents.setdefault(index, extent) != extent:
                raise ShapeMismatchError(
                    f"contract '{subscripts}': index '{index}' has inconsistent extents",
                    *[n.shape for n in nodes],
                )

    values = [node.value for node in nodes]
    value = np.einsum(subscripts, *values, optimize=True)

    def vjp(g):
        grads = []
        for k, (term, node) in enumerate(zip(terms, nodes)):
            if not node.requires_grad:
                grads.append(None)
                continue
            others = [(terms[j], values[j]) for j in range(len(nodes)) if j != k]
            seen = set(output).union(*[set(t) for t, _ in others])
            kept = "".join(index for index in term if index in seen)
            expression = ",".join([output] + [t for t, _ in others]) + "->" + kept
            partial = np.einsum(expression, g, *[v for _, v in others], optimize=True)
            # Indices summed only inside this operand broadcast back.
            partial = partial.reshape([extents[i] if i in seen else 1 for i in term])
            grads.append(np.broadcast_to(partial, node.shape).copy())
        return grads

    return nodes[0].tape.record("contract", value, nodes, vjp)


# Indexing


def gather(x: Node, indices: Sequence[int], axis: int = 0) -> Node:
    """Select entries along ``axis`` (numpy.take)."""
    indices = np.asarray(indices, dtype=np.int64)
    axis = axis % x.ndim
    if indices.size and (indices.min() < -x.shape[axis] or indices.max() >= x.shape[axis]):
        raise ShapeMismatchError(
            f"gather: index out of range for axis {axis}", x.shape, indices.shape
        )
    value = np.take(x.value, indices, axis=axis)

    def vjp(g):
        out = np.zeros(x.shape)
        moved = np.moveaxis(g, list(range(axis, axis + indices.ndim)), list(range(indices.ndim)))
        np.add.at(np.moveaxis(out, axis, 0), indices, moved)
        return (out,)

    return x.tape.record("gather", value, (x,), vjp)


def scatter_add(x: Node, indices: Sequence[int], size: int, axis: int = 0) -> Node:
    """Sum slices of ``x`` along ``axis`` into ``size`` buckets named by ``indices``."""
    indices = np.asarray(indices, dtype=np.int64)
    axis = axis % x.ndim
    if indices.ndim != 1 or len(indices) != x.shape[axis]:
        raise ShapeMismatchError(
            f"scatter_add: need one index per slice along axis {axis}", x.shape, indices.shape
        )
    shape = list(x.shape)
    shape[axis] = size
    value = np.zeros(shape)
    np.add.at(np.moveaxis(value, axis, 0), indices, np.moveaxis(x.value, axis, 0))

    def vjp(g):
        return (np.take(g, indices, axis=axis),)

    return x.tape.record("scatter_add", value, (x,), vjp)


# Reductions and shape


def sum(x: Node, axis: Axis = None, keepdims: bool = False) -> Node:  # noqa: A001
    value = np.sum(x.value, axis=axis, keepdims=keepdims)
    kept_shape = np.sum(x.value, axis=axis, keepdims=True).shape

    def vjp(g):
        return (np.broadcast_to(np.reshape(g, kept_shape), x.shape).copy(),)

    return x.tape.record("sum", value, (x,), vjp)


def mean(x: Node, axis: Axis = None, keepdims: bool = False) -> Node:
    count = x.value.size // max(np.sum(x.value, axis=axis, keepdims=True).size, 1)
    return multiply(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(x: Node, shape: Sequence[int]) -> Node:
    try:
        value = np.reshape(x.value, shape)
    except ValueError:
        raise ShapeMismatchError("reshape: sizes differ", x.shape, tuple(shape)) from None
    return x.tape.record("reshape", value, (x,), lambda g: (np.reshape(g, x.shape),))


def transpose(x: Node, axes: Optional[Sequence[int]] = None) -> Node:
    axes = tuple(range(x.ndim))[::-1] if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))
    return x.tape.record(
        "transpose", np.transpose(x.value, axes), (x,), lambda g: (np.transpose(g, inverse),)
    )


def concat(nodes: Sequence[Operand], axis: int = 0) -> Node:
    nodes = _lift_all(*nodes)
    try:
        value = np.concatenate([node.value for node in nodes], axis=axis)
    except ValueError:
        raise ShapeMismatchError(
            f"concat: shapes differ off axis {axis}", *[node.shape for node in nodes]
        ) from None
    splits = np.cumsum([node.shape[axis] for node in nodes])[:-1]

    def vjp(g):
        return [
            piece if node.requires_grad else None
            for node, piece in zip(nodes, np.split(g, splits, axis=axis))
        ]

    return nodes[0].tape.record("concat", value, nodes, vjp)


# Elementwise nonlinear


def sqrt(x: Node) -> Node:
    y = np.sqrt(x.value)
    return x.tape.record("sqrt", y, (x,), lambda g: (0.5 * g / y,))


def exp(x: Node) -> Node:
    y = np.exp(x.value)
    return x.tape.record("exp", y, (x,), lambda g: (g * y,))


def square(x: Node) -> Node:
    return x.tape.record("square", x.value**2, (x,), lambda g: (2.0 * g * x.value,))


def tanh(x: Node) -> Node:
    y = np.tanh(x.value)
    return x.tape.record("tanh", y, (x,), lambda g: (g * (1.0 - y**2),))


def shifted_softplus(x: Node) -> Node:
    """ln(0.5 e^x + 0.5): softplus shifted so that ssp(0) = 0."""
    y = np.logaddexp(x.value, 0.0) - LN2
    return x.tape.record("shifted_softplus", y, (x,), lambda g: (g * expit(x.value),))


def softmax(x: Node, axis: int = -1) -> Node:
    y = _softmax(x.value, axis=axis)

    def vjp(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return x.tape.record("softmax", y, (x,), vjp)


def log_softmax(x: Node, axis: int = -1) -> Node:
    y = _log_softmax(x.value, axis=axis)

    def vjp(g):
        return (g - np.exp(y) * np.sum(g, axis=axis, keepdims=True),)

    return x.tape.record("log_softmax", y, (x,), vjp)


def identity(x: Node) -> Node:
    return x


ACTIVATIONS = {
    "shifted_softplus": shifted_softplus,
    "tanh": tanh,
    "identity": identity,
}
