"""
Point convolution with filters F_cm(r) = R_c(r) Y_m(r_hat).

For one path (l_i, l_f -> l_o):

    L_acm_o = sum_{m_f, m_i} C[m_o, m_f, m_i] sum_b F_cm_f(r_ab) V_bcm_i

Channels are depthwise: filter channel c only ever touches input channel c.
"""

from typing import Dict, List, Mapping, Optional

import numpy as np

from shared.models.architecture import ConvolutionRecord, FilterSpec, RadialConfig
from shared.utils.errors import OrderMismatchError, ShapeMismatchError
from tfn.autodiff import Node, ops
from tfn.so3 import real_clebsch_gordan, spherical_harmonics_masked

from .base import Channels, Layer, register_layer
from .features import FeatureMap
from .geometry import PairGeometry
from .radial import ParamSource, RadialNet, radial_eval


def admissible_outputs(l_i: int, l_f: int) -> List[int]:
    """Output orders one (l_i, l_f) pair can produce: |l_i - l_f| .. l_i + l_f."""
    return list(range(abs(l_i - l_f), l_i + l_f + 1))


def filter_eval(spec: FilterSpec, net: RadialNet, params: ParamSource, displacement: np.ndarray) -> np.ndarray:
    """
    Filter value at one displacement, shape [channels, 2 l_f + 1].

    At r = 0 the l_f > 0 filters vanish and the l_f = 0 filter is R(0) Y^(0).
    """
    displacement = np.asarray(displacement, dtype=np.float64)
    radial = radial_eval(net, params, np.linalg.norm(displacement), key=spec.radial_key)
    return radial[:, None] * spherical_harmonics_masked(spec.l_f, displacement)[None, :]


def _check_input(spec: FilterSpec, geometry: PairGeometry, features: FeatureMap) -> Node:
    if features.num_points != geometry.num_points:
        raise ShapeMismatchError(
            "features and geometry differ in point count", (features.num_points,), (geometry.num_points,)
        )
    if spec.l_i not in features:
        raise OrderMismatchError(f"path {spec.l_i}->{spec.l_o} needs input order {spec.l_i}")
    inputs = features[spec.l_i]
    if inputs.shape[1] != spec.channels:
        raise OrderMismatchError(
            f"path {spec.l_i}->{spec.l_o} expects {spec.channels} channels at order {spec.l_i}, "
            f"got {inputs.shape[1]}"
        )
    return inputs


def convolve_path(
    spec: FilterSpec,
    radial: Node,
    geometry: PairGeometry,
    features: FeatureMap,
    mask: Optional[np.ndarray] = None,
) -> Node:
    """
    One path of the point convolution given radial values [n, n, channels].

    Returns:
        Node of shape [n, channels, 2 l_o + 1]
    """
    inputs = _check_input(spec, geometry, features)
    tape = inputs.tape
    if mask is not None:
        radial = ops.multiply(radial, mask[:, :, None])
    harmonics = tape.constant(geometry.harmonics(spec.l_f))
    coupling = tape.constant(real_clebsch_gordan(spec.l_o, spec.l_f, spec.l_i))
    return ops.contract("ofi,abc,abf,bci->aco", coupling, radial, harmonics, inputs)


def point_convolution(
    spec: FilterSpec,
    net: RadialNet,
    params: Mapping[str, Node],
    geometry: PairGeometry,
    features: FeatureMap,
) -> Node:
    """Contribution of one path at order l_o, shape [n, channels, 2 l_o + 1]."""
    outputs = net.forward(params, geometry.distances)
    radial = ops.gather(outputs, net.key_indices(spec.radial_key), axis=-1)
    return convolve_path(spec, radial, geometry, features, geometry.cutoff_mask(net.config.cutoff))


@register_layer
class Convolution(Layer):
    """
    A set of convolution paths sharing one radial network.

    Paths with the same (l_f, l_i) share radial outputs; results with the
    same l_o are concatenated along channels in path order.
    """

    kind = "convolution"

    def __init__(self, name: str, paths: List[FilterSpec], radial: RadialConfig):
        super().__init__(name)
        if not paths:
            raise ValueError("a convolution needs at least one path")
        self.paths = list(paths)
        self.radial_config = radial

        widths: Dict[str, int] = {}
        for path in self.paths:
            if widths.setdefault(path.radial_key, path.channels) != path.channels:
                raise OrderMismatchError(
                    f"paths sharing radial key {path.radial_key} must have equal channel counts"
                )
        self.net = RadialNet(radial, widths, prefix=self.qualified("radial"))

    @classmethod
    def from_record(cls, record: ConvolutionRecord, name: str) -> "Convolution":
        return cls(name, record.paths, record.radial)

    def to_record(self) -> ConvolutionRecord:
        return ConvolutionRecord(paths=self.paths, radial=self.radial_config)

    def output_channels(self, channels: Channels) -> Channels:
        out: Channels = {}
        for path in self.paths:
            if channels.get(path.l_i) != path.channels:
                raise OrderMismatchError(
                    f"{self.name}: path {path.l_i}->{path.l_o} expects {path.channels} channels "
                    f"at order {path.l_i}, got {channels.get(path.l_i)}"
                )
            out[path.l_o] = out.get(path.l_o, 0) + path.channels
        return dict(sorted(out.items()))

    def parameter_shapes(self):
        return self.net.parameter_shapes()

    def init_parameters(self, rng):
        return self.net.init_parameters(rng)

    def forward(self, params, geometry, features):
        outputs = self.net.forward(params, geometry.distances)
        mask = geometry.cutoff_mask(self.radial_config.cutoff)
        per_order: Dict[int, List[Node]] = {}
        for path in self.paths:
            radial = ops.gather(outputs, self.net.key_indices(path.radial_key), axis=-1)
            per_order.setdefault(path.l_o, []).append(convolve_path(path, radial, geometry, features, mask))
        return FeatureMap(
            {l: nodes[0] if len(nodes) == 1 else ops.concat(nodes, axis=1) for l, nodes in per_order.items()}
        )
