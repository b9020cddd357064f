"""
Base Task - Abstract base class for the demonstration tasks.

A task owns everything that is specific to one dataset: sample generation,
the network it trains, how a sample becomes network inputs, how network
outputs become a prediction, the loss and the evaluation metric.
"""

import logging
from abc import ABC, abstractmethod
from typing import Callable, ClassVar, Dict, List, Mapping, Optional, Sequence, Tuple, Type

import numpy as np

from shared.models.architecture import Architecture, RadialConfig
from shared.models.sample import LabeledSample, TaskKind
from shared.utils.config import RunConfig, config_hash
from shared.utils.errors import ConfigError
from tfn.autodiff import Node, ParameterStore, Tape
from tfn.layers import FeatureMap, PointCloud, TensorFieldNetwork

logger = logging.getLogger(__name__)

Inputs = Dict[int, np.ndarray]
RadialCurve = Callable[[np.ndarray], np.ndarray]


class BaseTask(ABC):
    """
    Abstract base class for tasks.

    Subclasses set ``kind`` and ``metric`` and implement generation, the
    architecture, encoding, readout, loss and scoring.
    """

    kind: ClassVar[TaskKind]
    # Name of the headline evaluation metric.
    metric: ClassVar[str]
    # How the readout transforms: "per_point", "pooled" or "position".
    prediction_kind: ClassVar[str] = "pooled"
    # False when the readout depends on point order (e.g. a query point kept last).
    permutable: ClassVar[bool] = True

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig(task=self.kind)
        if TaskKind(self.config.task) != self.kind:
            raise ConfigError(f"{type(self).__name__} cannot run a {TaskKind(self.config.task).value} config")
        self.config_hash = config_hash(self.config)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(seed={self.config.seed}, config_hash={self.config_hash})"

    # Data

    @abstractmethod
    def generate(
        self, seed: int, count: int, rotate: bool = True, translate: bool = True, start: int = 0
    ) -> List[LabeledSample]:
        """
        Samples ``start`` .. ``start + count - 1`` of the stream for ``seed``.

        Sample i depends only on (seed, i).
        """
        pass

    @property
    def default_count(self) -> int:
        return self.config.train_count

    def train_samples(self) -> List[LabeledSample]:
        return self.generate(self.config.seed, self.config.train_count)

    def test_samples(self) -> List[LabeledSample]:
        """Fresh samples, disjoint from the training stream."""
        return self.generate(self.config.seed, self.config.test_count, start=self.config.train_count)

    # Network

    def radial_config(self) -> RadialConfig:
        return RadialConfig(
            count=self.config.radial_count,
            r_min=self.config.radial_min,
            r_max=self.config.radial_max,
            hidden=self.config.radial_hidden,
            cutoff=self.config.cutoff,
        )

    @abstractmethod
    def architecture(self) -> Architecture:
        pass

    def build_model(self) -> TensorFieldNetwork:
        return TensorFieldNetwork(self.architecture())

    @abstractmethod
    def encode(self, sample: LabeledSample) -> Tuple[PointCloud, Inputs]:
        """Point cloud and per-order input arrays of one sample."""
        pass

    @abstractmethod
    def readout(self, outputs: FeatureMap, cloud: PointCloud) -> Node:
        """Prediction node computed from the network outputs."""
        pass

    @abstractmethod
    def loss(self, prediction: Node, sample: LabeledSample) -> Node:
        """Scalar loss of one sample."""
        pass

    @abstractmethod
    def score(self, predictions: Sequence[np.ndarray], samples: Sequence[LabeledSample]) -> Dict[str, float]:
        """Evaluation metrics; always contains ``self.metric``."""
        pass

    def prediction_features(self, prediction: np.ndarray) -> Inputs:
        """The prediction as per-order arrays, for the equivariance checks."""
        return {0: np.asarray(prediction).reshape(1, -1, 1)}

    # Evaluation

    def forward(self, model: TensorFieldNetwork, params: Mapping[str, Node], sample: LabeledSample, tape: Tape) -> Node:
        cloud, inputs = self.encode(sample)
        outputs = model.forward(params, cloud, FeatureMap.from_arrays(tape, inputs))
        return self.readout(outputs, cloud)

    def predict(self, model: TensorFieldNetwork, store: ParameterStore, sample: LabeledSample) -> np.ndarray:
        tape = Tape()
        params = {name: tape.constant(value) for name, value in store.items()}
        return self.forward(model, params, sample, tape).value.copy()

    def evaluate(
        self, model: TensorFieldNetwork, store: ParameterStore, samples: Sequence[LabeledSample]
    ) -> Dict[str, float]:
        """Score the model on ``samples``."""
        predictions = [self.predict(model, store, sample) for sample in samples]
        metrics = self.score(predictions, samples)
        logger.info(f"{self.kind.value}: {self.metric}={metrics[self.metric]:.6g} on {len(samples)} samples")
        return metrics

    # Radial oracles

    def analytic_radials(self) -> Dict[str, RadialCurve]:
        """Closed-form radial function per radial key, where the physics defines one."""
        return {}

    def recovery_range(self, samples: Optional[Sequence[LabeledSample]] = None) -> Tuple[float, float]:
        """Distances over which learned radials are compared with the analytic ones."""
        return self.config.radial_min, self.config.radial_max


TASK_REGISTRY: Dict[TaskKind, Type[BaseTask]] = {}


def register_task(cls: Type[BaseTask]) -> Type[BaseTask]:
    """Class decorator adding a task to the registry."""
    TASK_REGISTRY[cls.kind] = cls
    return cls


def get_task(kind, config: Optional[RunConfig] = None) -> BaseTask:
    """
    Instantiate the task of the given kind.

    Raises:
        ConfigError: If the task is unknown
    """
    try:
        kind = TaskKind(kind)
    except ValueError:
        raise ConfigError(
            f"unknown task '{kind}' (known: {', '.join(k.value for k in TaskKind)})"
        ) from None
    return TASK_REGISTRY[kind](config)
