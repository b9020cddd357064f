"""
Norm nonlinearity: a scalar gain computed from the rotation-invariant norm.

    l = 0:  eta(V + b)
    l > 0:  eta(||V|| + b) V,  ||V|| = sqrt(sum_m V_m^2 + eps)
"""

from typing import Callable, Dict, Mapping, Optional, Union

import numpy as np

from shared.models.architecture import NonlinearityRecord
from shared.utils.errors import OrderMismatchError
from tfn.autodiff import Node, ops

from .base import Channels, Layer, register_layer
from .features import FeatureMap


# Keeps the norm differentiable at V = 0.
NORM_EPSILON = 1e-12

DEFAULT_ACTIVATION = "shifted_softplus"

Activation = Union[str, Callable[[Node], Node]]


def _activation(spec: Activation) -> Callable[[Node], Node]:
    if callable(spec):
        return spec
    try:
        return ops.ACTIVATIONS[spec]
    except KeyError:
        raise ValueError(f"unknown activation '{spec}' (known: {sorted(ops.ACTIVATIONS)})") from None


def norm_nonlinearity(
    features: FeatureMap,
    biases: Optional[Mapping[int, Node]] = None,
    activations: Optional[Mapping[int, Activation]] = None,
) -> FeatureMap:
    """
    Apply eta per order; eta defaults to shifted softplus for every l.

    Args:
        features: Input feature map
        biases: Optional per-order biases of shape [channels]
        activations: Optional per-order activation (name or callable)
    """
    biases = biases or {}
    activations = activations or {}
    out = {}
    for l, node in features.items():
        eta = _activation(activations.get(l, DEFAULT_ACTIVATION))
        bias = biases.get(l)
        if bias is not None:
            bias = ops.reshape(bias, (1, node.shape[1], 1))
        if l == 0:
            out[l] = eta(node if bias is None else node + bias)
        else:
            norm = ops.sqrt(ops.sum(ops.square(node), axis=2, keepdims=True) + NORM_EPSILON)
            out[l] = ops.multiply(eta(norm if bias is None else norm + bias), node)
    return FeatureMap(out)


@register_layer
class Nonlinearity(Layer):
    kind = "nonlinearity"

    def __init__(self, name: str, channels: Channels, activations: Optional[Dict[int, str]] = None):
        super().__init__(name)
        self.channels = dict(sorted(channels.items()))
        self.activations = dict(activations or {})
        for spec in self.activations.values():
            _activation(spec)

    @classmethod
    def from_record(cls, record: NonlinearityRecord, name: str) -> "Nonlinearity":
        return cls(name, record.channels, record.activations)

    def to_record(self) -> NonlinearityRecord:
        return NonlinearityRecord(channels=self.channels, activations=self.activations)

    def output_channels(self, channels: Channels) -> Channels:
        if channels != self.channels:
            raise OrderMismatchError(f"{self.name}: expects channels {self.channels}, got {channels}")
        return dict(channels)

    def parameter_shapes(self):
        return {self.qualified(f"b{l}"): (c,) for l, c in self.channels.items()}

    def init_parameters(self, rng):
        return {name: np.zeros(shape) for name, shape in self.parameter_shapes().items()}

    def forward(self, params, geometry, features):
        biases = {l: self.param(params, f"b{l}") for l in self.channels}
        return norm_nonlinearity(features, biases, self.activations)
