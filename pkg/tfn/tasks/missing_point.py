"""
Missing-point toy: remove one block from a Tetris shape and put it back.

Every remaining point carries two one-hot scalars: the shape it belongs to
and its own block label (its index in the canonical shape). The network
emits per point 4 block-label logits, one confidence logit and one l = 1
displacement. The prediction is the confidence-weighted vote

    u = sum_a p_a (r_a + delta_a),  p = softmax(confidence)

and the block-label logits are pooled with the same weights.

When the three remaining blocks are collinear but the removed one is not
(L and T missing their side block), the answer is only fixed up to a turn
about the line, which no rotation-equivariant map can resolve; 30 of the
32 cases are learnable.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from shared.models.architecture import Architecture, RadialConfig, SelfInteractionRecord
from shared.models.sample import LabeledSample, MissingPointTarget, TaskKind
from tfn.autodiff import Node, ParameterStore, ops
from tfn.layers import FeatureMap, PointCloud, TensorFieldNetwork, displacements_from_features, vote_aggregate

from .base import BaseTask, register_task
from .networks import PATHS_FROM_SCALARS, PATHS_L1, conv_module
from .tetris import NUM_CLASSES, TETRIS_SHAPES, place

logger = logging.getLogger(__name__)

BLOCKS = TETRIS_SHAPES.shape[1]
NUM_CASES = NUM_CLASSES * BLOCKS
INPUT_CHANNELS = NUM_CLASSES + BLOCKS
CONFIDENCE = BLOCKS

# A replacement counts as correct within half a lattice spacing.
HIT_DISTANCE = 0.5


def missing_point_case(case: int) -> Tuple[int, int]:
    """(shape, removed block) of case 0..31."""
    case %= NUM_CASES
    return case // BLOCKS, case % BLOCKS


def gen_missing_point(
    seed: int = 0, count: int = NUM_CASES, rotate: bool = False, translate: bool = False, start: int = 0
) -> List[LabeledSample]:
    """Sample i removes block (i % 32) % 4 from shape (i % 32) // 4."""
    samples = []
    for index in range(start, start + count):
        shape, removed = missing_point_case(index)
        rng = np.random.default_rng([seed, index])
        points = place(TETRIS_SHAPES[shape], rng, rotate, translate)
        kept = [block for block in range(BLOCKS) if block != removed]
        samples.append(
            LabeledSample(
                task=TaskKind.MISSING_POINT,
                seed=seed,
                index=index,
                positions=points[kept].tolist(),
                types=kept,
                shape_class=shape,
                target=MissingPointTarget(position=points[removed].tolist(), type=removed),
            )
        )
    return samples


def build_missing_point_net(channels: int = 8, radial: Optional[RadialConfig] = None) -> Architecture:
    radial = radial or RadialConfig(r_max=3.0)
    widths = {0: channels}
    layers: list = [SelfInteractionRecord(channels_in={0: INPUT_CHANNELS}, channels_out=widths)]
    for paths in (PATHS_FROM_SCALARS, PATHS_L1):
        records, widths = conv_module(paths, widths, channels, radial)
        layers.extend(records)
    layers.append(SelfInteractionRecord(channels_in=widths, channels_out={0: BLOCKS + 1, 1: 1}))
    return Architecture(
        name="missing-point",
        task=TaskKind.MISSING_POINT.value,
        l_max=1,
        input_channels={0: INPUT_CHANNELS},
        layers=layers,
    )


def missing_point_inputs(sample: LabeledSample) -> np.ndarray:
    """One-hot shape (8) followed by one-hot block label (4), shape [n, 12, 1]."""
    n = len(sample.positions)
    features = np.zeros((n, INPUT_CHANNELS, 1))
    features[:, sample.shape_class, 0] = 1.0
    features[np.arange(n), NUM_CLASSES + np.asarray(sample.types), 0] = 1.0
    return features


def missing_point_toy(seed: int = 0, channels: int = 8) -> Tuple[List[LabeledSample], TensorFieldNetwork, ParameterStore]:
    """The 32 canonical cases plus a freshly initialised network."""
    model = TensorFieldNetwork(build_missing_point_net(channels))
    return gen_missing_point(seed), model, model.init_parameters(seed)


@register_task
class MissingPointTask(BaseTask):
    kind = TaskKind.MISSING_POINT
    metric = "hit_rate"
    prediction_kind = "position"

    @property
    def default_count(self) -> int:
        return NUM_CASES

    def generate(self, seed, count, rotate=True, translate=True, start=0):
        return gen_missing_point(seed, count, rotate, translate, start)

    def train_samples(self) -> List[LabeledSample]:
        return gen_missing_point(self.config.seed, max(self.config.train_count, NUM_CASES))

    def test_samples(self) -> List[LabeledSample]:
        """Case i % 32 in a random orientation and position."""
        return gen_missing_point(self.config.seed, self.config.test_count, rotate=True, translate=True)

    def architecture(self) -> Architecture:
        return build_missing_point_net(self.config.channels, self.radial_config())

    def encode(self, sample):
        cloud = PointCloud(positions=sample.positions_array(), types=sample.types)
        return cloud, {0: missing_point_inputs(sample)}

    def readout(self, outputs: FeatureMap, cloud: PointCloud) -> Node:
        """[u_x, u_y, u_z, block logits...]."""
        n = cloud.num_points
        scalars = ops.reshape(outputs[0], (n, BLOCKS + 1))
        confidence = ops.reshape(ops.gather(scalars, [CONFIDENCE], axis=1), (n,))
        block_logits = ops.gather(scalars, list(range(BLOCKS)), axis=1)
        displacements = displacements_from_features(ops.reshape(outputs[1], (n, 3)))

        position = vote_aggregate(confidence, displacements, cloud.positions)
        weights = ops.softmax(confidence, axis=0)
        pooled_logits = ops.contract("a,at->t", weights, block_logits)
        return ops.concat([position, pooled_logits], axis=0)

    def loss(self, prediction: Node, sample: LabeledSample) -> Node:
        position = ops.gather(prediction, [0, 1, 2], axis=0)
        logits = ops.gather(prediction, list(range(3, 3 + BLOCKS)), axis=0)
        distance = ops.sum(ops.square(position - sample.target_array()))
        cross_entropy = -ops.sum(ops.gather(ops.log_softmax(logits, axis=0), [sample.target.type], axis=0))
        return distance + cross_entropy

    def prediction_features(self, prediction: np.ndarray) -> Dict[int, np.ndarray]:
        return {1: np.asarray(prediction)[:3]}

    def score(self, predictions: Sequence[np.ndarray], samples: Sequence[LabeledSample]) -> Dict[str, float]:
        predictions = np.stack(predictions)
        targets = np.stack([s.target_array() for s in samples])
        distances = np.linalg.norm(predictions[:, :3] - targets, axis=-1)
        types = np.array([s.target.type for s in samples])
        return {
            "hit_rate": float(np.mean(distances < HIT_DISTANCE)),
            "distance_mae": float(np.mean(distances)),
            "type_accuracy": float(np.mean(np.argmax(predictions[:, 3:], axis=-1) == types)),
        }
