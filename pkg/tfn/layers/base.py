"""
Base Layer - Abstract base class for tensor field network layers.
"""

from abc import ABC, abstractmethod
from typing import ClassVar, Dict, Mapping, Tuple, Type

import numpy as np
from pydantic import BaseModel

from shared.utils.errors import IncompatibleCheckpointError
from tfn.autodiff import Node

from .features import FeatureMap
from .geometry import PairGeometry

Channels = Dict[int, int]


class Layer(ABC):
    """
    Abstract base class for layers.

    A layer is a pure function of (parameters, geometry, features). Its
    parameters live outside the layer under names prefixed with the layer
    name, so one layer object can run on many tapes at once.
    """

    kind: ClassVar[str]

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"

    @abstractmethod
    def output_channels(self, channels: Channels) -> Channels:
        """
        Channel count per order produced from the given input channels.

        Raises:
            OrderMismatchError: If the input orders or widths do not fit the layer
        """
        pass

    @abstractmethod
    def forward(self, params: Mapping[str, Node], geometry: PairGeometry, features: FeatureMap) -> FeatureMap:
        """Apply the layer on the tape that holds ``features``."""
        pass

    @abstractmethod
    def to_record(self) -> BaseModel:
        """The architecture record this layer was built from."""
        pass

    @classmethod
    @abstractmethod
    def from_record(cls, record: BaseModel, name: str) -> "Layer":
        pass

    def parameter_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {}

    def init_parameters(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        return {}

    def qualified(self, key: str) -> str:
        return f"{self.name}.{key}"

    def param(self, params: Mapping[str, Node], key: str) -> Node:
        try:
            return params[self.qualified(key)]
        except KeyError:
            raise IncompatibleCheckpointError(f"missing parameter '{self.qualified(key)}'") from None


LAYER_REGISTRY: Dict[str, Type[Layer]] = {}


def register_layer(cls: Type[Layer]) -> Type[Layer]:
    """Class decorator adding a layer kind to the registry."""
    LAYER_REGISTRY[cls.kind] = cls
    return cls


def layer_from_record(record: BaseModel, name: str) -> Layer:
    try:
        layer_cls = LAYER_REGISTRY[record.kind]
    except KeyError:
        raise ValueError(f"unknown layer kind '{record.kind}'") from None
    return layer_cls.from_record(record, name)


