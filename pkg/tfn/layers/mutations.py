"""
Deliberately broken layers.

Each one violates exactly one symmetry, so the equivariance checks can be
shown to catch it:

* MDependentSelfInteraction mixes channels with weights that depend on m
  (breaks rotation equivariance for l > 0);
* PositionGate scales features by 1 + |r_a|^2 of absolute positions
  (breaks translation equivariance);
* IndexGate scales point a by 1 + a (breaks permutation equivariance).
"""

import numpy as np

from shared.models.architecture import IndexGateRecord, MDependentSelfInteractionRecord, PositionGateRecord
from shared.utils.errors import OrderMismatchError
from tfn.autodiff import ops

from .base import Channels, Layer, register_layer
from .features import FeatureMap


@register_layer
class MDependentSelfInteraction(Layer):
    kind = "m_dependent_self_interaction"

    def __init__(self, name: str, channels: Channels):
        super().__init__(name)
        self.channels = dict(sorted(channels.items()))

    @classmethod
    def from_record(cls, record: MDependentSelfInteractionRecord, name: str) -> "MDependentSelfInteraction":
        return cls(name, record.channels)

    def to_record(self) -> MDependentSelfInteractionRecord:
        return MDependentSelfInteractionRecord(channels=self.channels)

    def output_channels(self, channels: Channels) -> Channels:
        if channels != self.channels:
            raise OrderMismatchError(f"{self.name}: expects channels {self.channels}, got {channels}")
        return dict(channels)

    def parameter_shapes(self):
        return {self.qualified(f"W{l}"): (c, c, 2 * l + 1) for l, c in self.channels.items()}

    def init_parameters(self, rng):
        params = {}
        for name, (c, _, width) in self.parameter_shapes().items():
            identity = np.repeat(np.eye(c)[:, :, None], width, axis=2)
            params[name] = identity + 0.5 * rng.standard_normal((c, c, width))
        return params

    def forward(self, params, geometry, features):
        return FeatureMap(
            {l: ops.contract("dcm,acm->adm", self.param(params, f"W{l}"), node) for l, node in features.items()}
        )


@register_layer
class PositionGate(Layer):
    kind = "position_gate"

    @classmethod
    def from_record(cls, record: PositionGateRecord, name: str) -> "PositionGate":
        return cls(name)

    def to_record(self) -> PositionGateRecord:
        return PositionGateRecord()

    def output_channels(self, channels: Channels) -> Channels:
        return dict(channels)

    def forward(self, params, geometry, features):
        gain = 1.0 + np.sum(geometry.positions**2, axis=-1)
        return FeatureMap({l: ops.multiply(node, gain[:, None, None]) for l, node in features.items()})


@register_layer
class IndexGate(Layer):
    kind = "index_gate"

    @classmethod
    def from_record(cls, record: IndexGateRecord, name: str) -> "IndexGate":
        return cls(name)

    def to_record(self) -> IndexGateRecord:
        return IndexGateRecord()

    def output_channels(self, channels: Channels) -> Channels:
        return dict(channels)

    def forward(self, params, geometry, features):
        gain = 1.0 + np.arange(features.num_points, dtype=np.float64)
        return FeatureMap({l: ops.multiply(node, gain[:, None, None]) for l, node in features.items()})
