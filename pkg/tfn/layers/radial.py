"""
Radial networks R_c(r): Gaussian basis -> dense -> shifted softplus -> dense.

One network serves a whole convolution layer; its outputs are split into
consecutive blocks, one block of ``channels`` outputs per (l_f, l_i) key.
"""

from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from shared.models.architecture import RadialConfig
from tfn.autodiff import Node, ParameterStore, ops

ParamSource = Union[ParameterStore, Mapping[str, np.ndarray]]


def gaussian_centers(config: RadialConfig) -> np.ndarray:
    return np.linspace(config.r_min, config.r_max, config.count)


def gaussian_basis(distances: np.ndarray, config: RadialConfig) -> np.ndarray:
    """exp(-(r - mu_k)^2 / (2 var)) for every center mu_k; shape [..., count]."""
    distances = np.asarray(distances, dtype=np.float64)
    offsets = distances[..., None] - gaussian_centers(config)
    return np.exp(-(offsets**2) / (2.0 * config.variance))


class RadialNet:
    """Two dense layers on a fixed Gaussian expansion of the distance."""

    def __init__(self, config: RadialConfig, channels: Mapping[str, int], prefix: str):
        self.config = config
        self.prefix = prefix
        self.blocks: Dict[str, Tuple[int, int]] = {}
        offset = 0
        for key, width in channels.items():
            self.blocks[key] = (offset, offset + width)
            offset += width
        self.outputs = offset

    def key_indices(self, key: str) -> np.ndarray:
        start, stop = self.blocks[key]
        return np.arange(start, stop)

    def names(self) -> Dict[str, str]:
        return {part: f"{self.prefix}.{part}" for part in ("W1", "b1", "W2", "b2")}

    def parameter_shapes(self) -> Dict[str, Tuple[int, ...]]:
        names = self.names()
        hidden, count = self.config.hidden, self.config.count
        return {
            names["W1"]: (hidden, count),
            names["b1"]: (hidden,),
            names["W2"]: (self.outputs, hidden),
            names["b2"]: (self.outputs,),
        }

    def init_parameters(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        names = self.names()
        hidden, count = self.config.hidden, self.config.count
        return {
            names["W1"]: rng.standard_normal((hidden, count)) / np.sqrt(count),
            names["b1"]: np.zeros(hidden),
            names["W2"]: rng.standard_normal((self.outputs, hidden)) / np.sqrt(hidden),
            names["b2"]: np.zeros(self.outputs),
        }

    def forward(self, params: Mapping[str, Node], distances: np.ndarray) -> Node:
        """All radial outputs at every distance, shape [..., outputs]."""
        names = self.names()
        w1 = params[names["W1"]]
        basis = w1.tape.constant(gaussian_basis(distances, self.config))
        hidden = ops.shifted_softplus(ops.matmul(basis, ops.transpose(w1)) + params[names["b1"]])
        return ops.matmul(hidden, ops.transpose(params[names["W2"]])) + params[names["b2"]]

    def evaluate(self, params: ParamSource, distances: np.ndarray) -> np.ndarray:
        """Plain numpy forward pass, shape [..., outputs]."""
        names = self.names()
        basis = gaussian_basis(distances, self.config)
        pre = basis @ np.asarray(params[names["W1"]]).T + np.asarray(params[names["b1"]])
        hidden = np.logaddexp(pre, 0.0) - np.log(2.0)
        return hidden @ np.asarray(params[names["W2"]]).T + np.asarray(params[names["b2"]])


def radial_eval(net: RadialNet, params: ParamSource, r: Union[float, np.ndarray], key: Optional[str] = None) -> np.ndarray:
    """
    Radial outputs at distance(s) r; restricted to one (l_f, l_i) key if given.

    Raises:
        ValueError: If any distance is negative
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("distances must be non-negative")
    values = net.evaluate(params, r)
    if key is not None:
        start, stop = net.blocks[key]
        values = values[..., start:stop]
    return values
