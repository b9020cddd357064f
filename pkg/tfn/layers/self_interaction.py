"""
Self-interaction: per-point channel mixing, the 1x1-convolution analog.
"""

from typing import Mapping, Optional

import numpy as np

from shared.models.architecture import SelfInteractionRecord
from shared.utils.errors import OrderMismatchError, ShapeMismatchError
from tfn.autodiff import Node, ops

from .base import Channels, Layer, register_layer
from .features import FeatureMap


def self_interaction(
    features: FeatureMap,
    weights: Mapping[int, Node],
    bias: Optional[Node] = None,
) -> FeatureMap:
    """
    V'_acm = sum_c' W^(l)_cc' V_ac'm (+ b_c for l = 0).

    The same weights act on every m, so the map commutes with D^(l).

    Args:
        features: Input feature map
        weights: Per-order matrices of shape [channels_out, channels_in]
        bias: Optional l = 0 bias of shape [channels_out]
    """
    out = {}
    for l, node in features.items():
        if l not in weights:
            raise OrderMismatchError(f"no self-interaction weights for order {l}")
        w = weights[l]
        if w.ndim != 2 or w.shape[1] != node.shape[1]:
            raise ShapeMismatchError(f"order {l} weights do not match the input channels", w.shape, node.shape)
        mixed = ops.contract("dc,acm->adm", w, node)
        if l == 0 and bias is not None:
            if bias.shape != (w.shape[0],):
                raise ShapeMismatchError("l = 0 bias does not match the output channels", bias.shape, w.shape)
            mixed = mixed + ops.reshape(bias, (1, w.shape[0], 1))
        out[l] = mixed
    if bias is not None and 0 not in features:
        raise OrderMismatchError("a bias was given but the input has no l = 0 features")
    return FeatureMap(out)


@register_layer
class SelfInteraction(Layer):
    kind = "self_interaction"

    def __init__(self, name: str, channels_in: Channels, channels_out: Channels, bias: bool = True):
        super().__init__(name)
        if set(channels_in) != set(channels_out):
            raise OrderMismatchError("self-interaction must map the same set of orders")
        self.channels_in = dict(sorted(channels_in.items()))
        self.channels_out = dict(sorted(channels_out.items()))
        self.bias = bias and 0 in self.channels_in

    @classmethod
    def from_record(cls, record: SelfInteractionRecord, name: str) -> "SelfInteraction":
        return cls(name, record.channels_in, record.channels_out, record.bias)

    def to_record(self) -> SelfInteractionRecord:
        return SelfInteractionRecord(channels_in=self.channels_in, channels_out=self.channels_out, bias=self.bias)

    def output_channels(self, channels: Channels) -> Channels:
        if channels != self.channels_in:
            raise OrderMismatchError(f"{self.name}: expects channels {self.channels_in}, got {channels}")
        return dict(self.channels_out)

    def parameter_shapes(self):
        shapes = {self.qualified(f"W{l}"): (self.channels_out[l], c) for l, c in self.channels_in.items()}
        if self.bias:
            shapes[self.qualified("b0")] = (self.channels_out[0],)
        return shapes

    def init_parameters(self, rng):
        params = {}
        for name, shape in self.parameter_shapes().items():
            if name.endswith(".b0"):
                params[name] = np.zeros(shape)
            else:
                params[name] = rng.standard_normal(shape) / np.sqrt(shape[1])
        return params

    def forward(self, params, geometry, features):
        weights = {l: self.param(params, f"W{l}") for l in self.channels_in}
        bias = self.param(params, "b0") if self.bias else None
        return self_interaction(features, weights, bias)
