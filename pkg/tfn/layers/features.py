"""
Feature maps: per-order tensors V^(l) of shape [points, channels, 2l + 1].
"""

from collections.abc import Mapping
from typing import Dict, Iterable, Iterator, List, Sequence

import numpy as np

from shared.utils.errors import OrderMismatchError, ShapeMismatchError
from tfn.autodiff import Node, Tape, ops


class FeatureMap(Mapping):
    """
    Immutable mapping from rotation order to a tape node.

    Every order shares the point count and carries at least one channel.
    """

    def __init__(self, features: Mapping):
        if not features:
            raise OrderMismatchError("a feature map needs at least one order")
        points = None
        for l, node in features.items():
            if not isinstance(node, Node):
                raise TypeError(f"order {l} holds {type(node).__name__}, expected a tape node")
            if node.ndim != 3 or node.shape[2] != 2 * l + 1:
                raise ShapeMismatchError(f"order {l} features must be [points, channels, {2 * l + 1}]", node.shape)
            if node.shape[1] < 1:
                raise OrderMismatchError(f"order {l} has no channels")
            if points is None:
                points = node.shape[0]
            elif node.shape[0] != points:
                raise ShapeMismatchError(
                    "all orders must share the point count", *[n.shape for n in features.values()]
                )
        self._features: Dict[int, Node] = {int(l): features[l] for l in sorted(features)}

    def __getitem__(self, l: int) -> Node:
        try:
            return self._features[l]
        except KeyError:
            raise OrderMismatchError(f"feature map has no order {l} (orders {self.orders})") from None

    def __contains__(self, l: object) -> bool:
        return l in self._features

    def get(self, l: int, default=None):
        return self._features.get(l, default)

    def __iter__(self) -> Iterator[int]:
        return iter(self._features)

    def __len__(self) -> int:
        return len(self._features)

    def __repr__(self) -> str:
        return f"FeatureMap(points={self.num_points}, channels={self.channels()})"

    @property
    def orders(self) -> List[int]:
        return list(self._features)

    @property
    def num_points(self) -> int:
        return next(iter(self._features.values())).shape[0]

    @property
    def tape(self) -> Tape:
        return next(iter(self._features.values())).tape

    def channels(self) -> Dict[int, int]:
        return {l: node.shape[1] for l, node in self._features.items()}

    def to_arrays(self) -> Dict[int, np.ndarray]:
        return {l: node.value.copy() for l, node in self._features.items()}

    @classmethod
    def from_arrays(cls, tape: Tape, arrays: Mapping) -> "FeatureMap":
        """Wrap plain arrays as constants on ``tape``."""
        return cls({int(l): tape.constant(np.asarray(value, dtype=np.float64)) for l, value in arrays.items()})


def concat_features(inputs: Sequence[FeatureMap]) -> FeatureMap:
    """Channel-wise concatenation per order; orders present in one input pass through."""
    if not inputs:
        raise OrderMismatchError("nothing to concatenate")
    if len(inputs) == 1:
        return inputs[0]
    points = {fm.num_points for fm in inputs}
    if len(points) != 1:
        raise ShapeMismatchError("feature maps differ in point count", *[(fm.num_points,) for fm in inputs])

    merged: Dict[int, List[Node]] = {}
    for fm in inputs:
        for l, node in fm.items():
            merged.setdefault(l, []).append(node)
    return FeatureMap(
        {l: nodes[0] if len(nodes) == 1 else ops.concat(nodes, axis=1) for l, nodes in merged.items()}
    )


def select_orders(features: FeatureMap, orders: Iterable[int]) -> FeatureMap:
    """Keep only the listed orders."""
    return FeatureMap({l: features[l] for l in orders})


def global_pool(features: FeatureMap) -> FeatureMap:
    """
    Sum over points. The point axis is kept with extent 1.

    Invariant under permutations; commutes with rotations because D acts
    linearly on the m axis.
    """
    return FeatureMap({l: ops.sum(node, axis=0, keepdims=True) for l, node in features.items()})
