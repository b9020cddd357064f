"""
3D Tetris: classify the 8 four-block shapes in any orientation.

The network is trained on the canonical orientations only; rotation
equivariance makes the rotated and translated test shapes look the same.
Shapes 2 and 3 are mirror images with identical pair distances, so only a
network sensitive to chirality separates them.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from shared.models.architecture import (
    Architecture,
    GlobalPoolRecord,
    RadialConfig,
    SelectOrdersRecord,
    SelfInteractionRecord,
)
from shared.models.sample import LabeledSample, TaskKind
from tfn.autodiff import Node, ops
from tfn.layers import FeatureMap, PointCloud
from tfn.so3 import Rotation

from .base import BaseTask, register_task
from .networks import PATHS_FROM_SCALARS, PATHS_L1, conv_module

logger = logging.getLogger(__name__)

TETRIS_SHAPES = np.array(
    [
        [(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 0, 3)],  # line
        [(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 0)],  # L
        [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 1, 0)],  # chiral shape
        [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, -1, 0)],  # its mirror image
        [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)],  # square
        [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)],  # corner
        [(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 1)],  # T
        [(0, 0, 0), (1, 0, 0), (1, 1, 0), (2, 1, 0)],  # zigzag
    ],
    dtype=np.float64,
)
TETRIS_NAMES = ("line", "L", "chiral-1", "chiral-2", "square", "corner", "T", "zigzag")
NUM_CLASSES = len(TETRIS_SHAPES)
MIRROR_PAIR = (2, 3)

# Half-width of the random translation applied to test shapes.
TRANSLATION_RANGE = 3.0


def place(points: np.ndarray, rng: np.random.Generator, rotate: bool, translate: bool) -> np.ndarray:
    """Optionally rotate (about the origin) and then translate a set of points."""
    if rotate:
        points = Rotation.random(rng).apply(points)
    if translate:
        points = points + rng.uniform(-TRANSLATION_RANGE, TRANSLATION_RANGE, size=3)
    return points


def gen_tetris(
    rotate: bool = False, translate: bool = False, seed: int = 0, count: int = NUM_CLASSES, start: int = 0
) -> List[LabeledSample]:
    """
    Tetris samples; sample i is shape i % 8.

    Examples:
        gen_tetris() -> the 8 canonical shapes with labels 0..7
    """
    samples = []
    for index in range(start, start + count):
        label = index % NUM_CLASSES
        rng = np.random.default_rng([seed, index])
        positions = place(TETRIS_SHAPES[label], rng, rotate, translate)
        samples.append(
            LabeledSample(task=TaskKind.TETRIS, seed=seed, index=index, positions=positions.tolist(), target=label)
        )
    return samples


def build_tetris_net(channels: int = 4, radial: Optional[RadialConfig] = None, name: str = "tetris") -> Architecture:
    """
    Embedding, three convolution modules and a dense head on the pooled scalars.

    The first module only has scalar inputs; the later two use every path
    with l <= 1, so cross products (1 x 1 -> 1) followed by dot products
    (1 x 1 -> 0) can produce pseudoscalars that tell mirror images apart.
    """
    radial = radial or RadialConfig(r_max=3.0)
    widths = {0: channels}
    layers: list = [SelfInteractionRecord(channels_in={0: 1}, channels_out=widths)]
    for paths in (PATHS_FROM_SCALARS, PATHS_L1, PATHS_L1):
        records, widths = conv_module(paths, widths, channels, radial)
        layers.extend(records)
    layers.extend(
        [
            SelectOrdersRecord(orders=[0]),
            GlobalPoolRecord(),
            SelfInteractionRecord(channels_in={0: channels}, channels_out={0: NUM_CLASSES}),
        ]
    )
    return Architecture(name=name, task=TaskKind.TETRIS.value, l_max=1, input_channels={0: 1}, layers=layers)


def tetris_mirror_distances() -> Tuple[np.ndarray, np.ndarray]:
    """Sorted pair-distance multisets of the two mirror shapes."""
    result = []
    for label in MIRROR_PAIR:
        points = TETRIS_SHAPES[label]
        diffs = points[:, None, :] - points[None, :, :]
        upper = np.triu_indices(len(points), k=1)
        result.append(np.sort(np.linalg.norm(diffs, axis=-1)[upper]))
    return result[0], result[1]


@register_task
class TetrisTask(BaseTask):
    kind = TaskKind.TETRIS
    metric = "accuracy"
    prediction_kind = "pooled"

    @property
    def default_count(self) -> int:
        return NUM_CLASSES

    def generate(self, seed, count, rotate=True, translate=True, start=0):
        return gen_tetris(rotate=rotate, translate=translate, seed=seed, count=count, start=start)

    def train_samples(self) -> List[LabeledSample]:
        """The canonical orientations, repeated to train_count samples."""
        return gen_tetris(seed=self.config.seed, count=max(self.config.train_count, NUM_CLASSES))

    def architecture(self) -> Architecture:
        return build_tetris_net(self.config.channels, self.radial_config())

    def encode(self, sample):
        positions = sample.positions_array()
        return PointCloud(positions=positions), {0: np.ones((len(positions), 1, 1))}

    def readout(self, outputs: FeatureMap, cloud: PointCloud) -> Node:
        return ops.reshape(outputs[0], (NUM_CLASSES,))

    def loss(self, prediction: Node, sample: LabeledSample) -> Node:
        log_probs = ops.log_softmax(prediction, axis=0)
        return -ops.sum(ops.gather(log_probs, [sample.target], axis=0))

    def score(self, predictions: Sequence[np.ndarray], samples: Sequence[LabeledSample]) -> Dict[str, float]:
        labels = np.array([s.target for s in samples])
        guesses = np.array([int(np.argmax(p)) for p in predictions])
        mirror = np.isin(labels, MIRROR_PAIR)
        metrics = {"accuracy": float(np.mean(guesses == labels))}
        if mirror.any():
            metrics["mirror_accuracy"] = float(np.mean(guesses[mirror] == labels[mirror]))
        return metrics
