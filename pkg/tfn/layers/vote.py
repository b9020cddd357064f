"""
Vote aggregation: every point votes for a location, weighted by a softmax.

    u = sum_a p_a (r_a + delta_a),  p = softmax(logits)

Since the p_a sum to one, translating every r_a by t moves u by exactly t.
"""

from typing import Union

import numpy as np

from shared.utils.errors import ShapeMismatchError
from tfn.autodiff import Node, Tape, ops
from tfn.so3 import sh_to_cartesian

Operand = Union[Node, np.ndarray]


def displacements_from_features(vectors: Node) -> Node:
    """Reorder an l = 1 node [..., 3] from (y, z, x) to Cartesian (x, y, z)."""
    order = sh_to_cartesian(np.arange(3))
    return ops.gather(vectors, order, axis=-1)


def vote_aggregate(logits: Operand, displacements: Operand, positions: np.ndarray) -> Node:
    """
    Weighted vote for one location.

    Args:
        logits: One confidence logit per point, shape [n]
        displacements: Cartesian offset per point, shape [n, 3]
        positions: Point positions, shape [n, 3]

    Returns:
        Node holding the voted 3-vector
    """
    positions = np.asarray(positions, dtype=np.float64)
    if not isinstance(logits, Node) and not isinstance(displacements, Node):
        tape = Tape()
        logits, displacements = tape.constant(logits), tape.constant(displacements)
    tape = logits.tape if isinstance(logits, Node) else displacements.tape
    logits, displacements = tape.lift(logits), tape.lift(displacements)

    n = positions.shape[0]
    if logits.shape != (n,) or displacements.shape != (n, 3) or positions.shape != (n, 3):
        raise ShapeMismatchError(
            "vote needs one logit and one displacement per point",
            logits.shape,
            displacements.shape,
            positions.shape,
        )
    weights = ops.softmax(logits, axis=0)
    return ops.contract("a,ax->x", weights, displacements + positions)
