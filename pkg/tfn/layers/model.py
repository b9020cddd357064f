"""
TensorFieldNetwork: a stack of layers assembled from an Architecture record.
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from shared.models.architecture import Architecture
from shared.models.checkpoint import Checkpoint
from shared.utils.errors import IncompatibleCheckpointError
from tfn.autodiff import Node, ParameterStore, Tape

from .base import Channels, Layer, layer_from_record
from .convolution import Convolution
from .features import FeatureMap
from .geometry import PairGeometry, PointCloud
from .radial import RadialNet

logger = logging.getLogger(__name__)


class TensorFieldNetwork:
    """
    Layers applied in order to (cloud, features).

    The network holds no parameter values; those live in a ParameterStore
    so one network can be evaluated with many parameter sets.
    """

    def __init__(self, architecture: Architecture):
        self.architecture = architecture
        self.layers: List[Layer] = [
            layer_from_record(record, f"{index:02d}_{record.kind}")
            for index, record in enumerate(architecture.layers)
        ]

        channels: Channels = dict(architecture.input_channels)
        self.channel_flow: List[Channels] = [channels]
        for layer in self.layers:
            channels = layer.output_channels(channels)
            self.channel_flow.append(channels)

    def __repr__(self) -> str:
        return f"TensorFieldNetwork(name={self.architecture.name!r}, layers={len(self.layers)})"

    @property
    def name(self) -> str:
        return self.architecture.name

    @property
    def input_channels(self) -> Channels:
        return self.channel_flow[0]

    @property
    def output_channels(self) -> Channels:
        return self.channel_flow[-1]

    def parameter_shapes(self) -> Dict[str, Tuple[int, ...]]:
        shapes: Dict[str, Tuple[int, ...]] = {}
        for layer in self.layers:
            shapes.update(layer.parameter_shapes())
        return shapes

    def init_parameters(self, seed: int = 0) -> ParameterStore:
        """Fresh parameters; a pure function of the seed."""
        rng = np.random.default_rng(seed)
        store = ParameterStore()
        for layer in self.layers:
            for name, value in layer.init_parameters(rng).items():
                store[name] = value
        logger.debug(f"Initialised {store.size} parameters for {self.name}")
        return store

    def check_parameters(self, store: ParameterStore) -> None:
        """
        Raises:
            IncompatibleCheckpointError: On missing, unexpected or mis-shaped parameters
        """
        expected = self.parameter_shapes()
        found = store.shapes()
        missing = sorted(set(expected) - set(found))
        extra = sorted(set(found) - set(expected))
        if missing or extra:
            raise IncompatibleCheckpointError(
                f"parameters do not match {self.name}: missing {missing}, unexpected {extra}"
            )
        for name, shape in expected.items():
            if tuple(found[name]) != tuple(shape):
                raise IncompatibleCheckpointError(f"parameter '{name}' has the wrong shape", found[name], shape)

    def forward(
        self,
        params: Mapping[str, Node],
        cloud: PointCloud,
        features: FeatureMap,
        layers: Optional[slice] = None,
    ) -> FeatureMap:
        """Run the layers (or a slice of them) on the tape holding ``features``."""
        geometry = PairGeometry.from_cloud(cloud)
        for layer in self.layers[layers or slice(None)]:
            features = layer.forward(params, geometry, features)
        return features

    def __call__(
        self,
        store: ParameterStore,
        cloud: PointCloud,
        inputs: Mapping[int, np.ndarray],
        layers: Optional[slice] = None,
    ) -> Dict[int, np.ndarray]:
        """Evaluate on plain arrays; no gradients are recorded."""
        tape = Tape()
        params = {name: tape.constant(value) for name, value in store.items()}
        features = FeatureMap.from_arrays(tape, inputs)
        return self.forward(params, cloud, features, layers).to_arrays()

    def radial_nets(self) -> List[Tuple[Convolution, RadialNet]]:
        return [(layer, layer.net) for layer in self.layers if isinstance(layer, Convolution)]

    def to_checkpoint(
        self,
        store: ParameterStore,
        task: str,
        config_hash: str = "",
        config: Optional[Dict[str, Any]] = None,
        metrics: Optional[Dict[str, float]] = None,
    ) -> Checkpoint:
        self.check_parameters(store)
        return Checkpoint(
            task=task,
            config_hash=config_hash,
            config=config,
            architecture=self.architecture,
            parameters=store.to_records(),
            metrics=metrics or {},
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> Tuple["TensorFieldNetwork", ParameterStore]:
        """
        Rebuild the network and its parameters.

        Raises:
            IncompatibleCheckpointError: If the parameters do not fit the architecture
        """
        model = cls(checkpoint.architecture)
        store = ParameterStore.from_records(checkpoint.parameters)
        model.check_parameters(store)
        return model, store
