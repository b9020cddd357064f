"""
Reverse-mode tape over numpy float64 arrays.

A Tape is a Wengert list: every operation appends one entry holding its
op kind, the ids of its inputs and a vector-Jacobian product closure over
the values it saved. Ids are assigned in append order, so every entry only
refers to strictly smaller ids and the list is already topologically sorted.
"""

import logging
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from shared.utils.errors import NonScalarLossError

logger = logging.getLogger(__name__)

# Maps the output cotangent to one cotangent (or None) per input.
VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class TapeEntry(NamedTuple):
    op: str
    inputs: Tuple[int, ...]
    vjp: Optional[VJP]


class Node:
    """A value recorded on a tape."""

    __slots__ = ("tape", "id", "value")

    # Make numpy defer to the reflected operators below.
    __array_ufunc__ = None
    __array_priority__ = 100.0

    def __init__(self, tape: "Tape", node_id: int, value: np.ndarray):
        self.tape = tape
        self.id = node_id
        self.value = value

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def requires_grad(self) -> bool:
        """True if the node depends on a registered parameter."""
        return self.tape.requires[self.id]

    def __repr__(self) -> str:
        return f"Node(id={self.id}, op={self.tape.entries[self.id].op}, shape={self.shape})"

    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops

        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops

        return ops.subtract(self, other)

    def __rsub__(self, other):
        from . import ops

        return ops.subtract(other, self)

    def __mul__(self, other):
        from . import ops

        return ops.multiply(self, other)

    def __rmul__(self, other):
        from . import ops

        return ops.multiply(other, self)

    def __neg__(self):
        from . import ops

        return ops.negate(self)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)

    def __rmatmul__(self, other):
        from . import ops

        return ops.matmul(other, self)


class Tape:
    """
    Append-only record of a computation.

    A tape is used by one thread; parameters are copied onto it, never shared.
    """

    def __init__(self):
        self.nodes: List[Node] = []
        self.entries: List[TapeEntry] = []
        self.requires: List[bool] = []
        self.parameters: Dict[str, Node] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def record(
        self,
        op: str,
        value: np.ndarray,
        inputs: Sequence[Node] = (),
        vjp: Optional[VJP] = None,
    ) -> Node:
        """Append one operation and return its output node."""
        node_id = len(self.nodes)
        for node in inputs:
            if node.tape is not self:
                raise ValueError(f"input node {node.id} of '{op}' belongs to another tape")
            if node.id >= node_id:
                raise ValueError(f"input node {node.id} of '{op}' is not older than its output")
        requires = any(self.requires[n.id] for n in inputs)
        node = Node(self, node_id, np.asarray(value, dtype=np.float64))
        self.nodes.append(node)
        # Entries that cannot reach a parameter never need their adjoint.
        self.entries.append(TapeEntry(op, tuple(n.id for n in inputs), vjp if requires else None))
        self.requires.append(requires)
        return node

    def constant(self, value) -> Node:
        """A leaf that receives no gradient."""
        return self.record("constant", np.array(value, dtype=np.float64))

    def parameter(self, name: str, value: np.ndarray) -> Node:
        """Register a named leaf; its value is copied onto the tape."""
        if name in self.parameters:
            raise ValueError(f"parameter '{name}' is already registered on this tape")
        node = self.record("parameter", np.array(value, dtype=np.float64, copy=True))
        self.requires[node.id] = True
        self.parameters[name] = node
        return node

    def lift(self, value) -> Node:
        """Return ``value`` unchanged if it is a node of this tape, else a constant."""
        if isinstance(value, Node):
            if value.tape is not self:
                raise ValueError(f"node {value.id} belongs to another tape")
            return value
        return self.constant(value)

    def gradients(self, loss: Node) -> Dict[int, np.ndarray]:
        """Cotangent of every node that ``loss`` depends on, keyed by node id."""
        if loss.tape is not self:
            raise ValueError("loss node belongs to another tape")
        if loss.value.size != 1:
            raise NonScalarLossError(f"loss must be a scalar, got shape {loss.shape}")

        grads: Dict[int, np.ndarray] = {loss.id: np.ones_like(loss.value)}
        for node_id in range(loss.id, -1, -1):
            grad = grads.get(node_id)
            entry = self.entries[node_id]
            if grad is None or entry.vjp is None:
                continue
            for input_id, input_grad in zip(entry.inputs, entry.vjp(grad)):
                if input_grad is None:
                    continue
                if input_id in grads:
                    grads[input_id] = grads[input_id] + input_grad
                else:
                    grads[input_id] = input_grad
        return grads

    def backward(self, loss: Node) -> Dict[str, np.ndarray]:
        """
        Gradients of a scalar loss with respect to every registered parameter.

        Parameters the loss does not depend on get zero gradients.

        Raises:
            NonScalarLossError: If the loss holds more than one value
        """
        grads = self.gradients(loss)
        result = {}
        for name, node in self.parameters.items():
            grad = grads.get(node.id)
            result[name] = np.zeros_like(node.value) if grad is None else np.asarray(grad).reshape(node.shape)
        logger.debug(f"Backward pass over {loss.id + 1} nodes, {len(result)} parameters")
        return result


def backward(tape: Tape, loss: Node) -> Dict[str, np.ndarray]:
    """Gradients of ``loss`` for all parameters registered on ``tape``."""
    return tape.backward(loss)
