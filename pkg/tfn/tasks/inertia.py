"""
Moment of inertia tensor of a mass cloud about a query point.

    I = sum_p m_p [ |r_p|^2 1 - r_p r_p^T ],  r_p = x_p - q

Split into 0 (+) 2 parts this is

    I = sum_p m_p [ (2/3) r^2 1 - r^2 (r_hat r_hat^T - 1/3) ]

so one convolution with l = 0 and l = 2 filters, read at the query point,
can represent it; the radials become (2/3) r^2 and -r^2. The query point is
appended to the cloud as a massless point and read out last.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from shared.models.architecture import Architecture, ConvolutionRecord, FilterSpec, RadialConfig
from shared.models.sample import LabeledSample, TaskKind
from tfn.autodiff import Node, ops
from tfn.layers import FeatureMap, PointCloud
from tfn.so3 import irreps_from_symmetric, symmetric_from_irreps

from .base import BaseTask, register_task
from .gravity import min_pair_distance, sample_mass_cloud

logger = logging.getLogger(__name__)

CUBE_SIDE = 1.0

# Y^(0) = 1 / sqrt(4 pi); the isotropic part enters as s 1 / sqrt(3).
SCALAR_GAIN = np.sqrt(12.0 * np.pi)
# E(Y^(2)(r_hat)) = r_hat r_hat^T - 1/3 once scaled by 1 / ALPHA.
TENSOR_GAIN = np.sqrt(8.0 * np.pi / 15.0)

SCALAR_KEY = "lf0_li0"
TENSOR_KEY = "lf2_li0"


def _embedding_basis() -> np.ndarray:
    """[6, 3, 3]: the matrices of unit s followed by the five unit l = 2 coordinates."""
    basis = [symmetric_from_irreps(1.0, np.zeros(5))]
    basis.extend(symmetric_from_irreps(0.0, np.eye(5)[k]) for k in range(5))
    return np.stack(basis)


EMBEDDING_BASIS = _embedding_basis()


def inertia_tensor(positions: np.ndarray, masses: np.ndarray, query: np.ndarray) -> np.ndarray:
    offsets = np.asarray(positions, dtype=np.float64) - np.asarray(query, dtype=np.float64)
    masses = np.asarray(masses, dtype=np.float64)
    squared = np.sum(offsets**2, axis=-1)
    return np.sum(masses * squared) * np.eye(3) - np.einsum("p,pi,pj->ij", masses, offsets, offsets)


def gen_inertia(seed: int, index: int = 0) -> LabeledSample:
    rng = np.random.default_rng([seed, index])
    positions, masses = sample_mass_cloud(rng, CUBE_SIDE)
    query = rng.uniform(-CUBE_SIDE / 2.0, CUBE_SIDE / 2.0, size=3)
    return LabeledSample(
        task=TaskKind.INERTIA,
        seed=seed,
        index=index,
        positions=positions.tolist(),
        masses=masses.tolist(),
        query_point=query.tolist(),
        target=inertia_tensor(positions, masses, query).tolist(),
    )


def build_inertia_net(radial: Optional[RadialConfig] = None, channels: int = 1) -> Architecture:
    """One convolution with a 0 -> 0 and a 0 -> 2 path."""
    radial = radial or RadialConfig()
    return Architecture(
        name="inertia",
        task=TaskKind.INERTIA.value,
        l_max=2,
        input_channels={0: channels},
        layers=[
            ConvolutionRecord(
                paths=[
                    FilterSpec(l_i=0, l_f=0, l_o=0, channels=channels),
                    FilterSpec(l_i=0, l_f=2, l_o=2, channels=channels),
                ],
                radial=radial,
            )
        ],
    )


def query_cloud(sample: LabeledSample) -> PointCloud:
    """The sample's points plus its query point, massless and last."""
    positions = np.vstack([sample.positions_array(), np.asarray(sample.query_point)[None, :]])
    masses = np.append(sample.masses_array(), 0.0)
    return PointCloud(positions=positions, masses=masses)


def mean_minimum_distance(samples: Sequence[LabeledSample]) -> float:
    """Average over samples of the smallest pair distance, query point included."""
    return float(np.mean([min_pair_distance(query_cloud(s).positions) for s in samples]))


@register_task
class InertiaTask(BaseTask):
    kind = TaskKind.INERTIA
    metric = "mae"
    prediction_kind = "pooled"
    permutable = False

    def generate(self, seed, count, rotate=True, translate=True, start=0) -> List[LabeledSample]:
        return [gen_inertia(seed, index) for index in range(start, start + count)]

    def architecture(self) -> Architecture:
        return build_inertia_net(self.radial_config(), self.config.channels)

    def encode(self, sample):
        cloud = query_cloud(sample)
        return cloud, {0: np.repeat(cloud.masses[:, None, None], self.config.channels, axis=1)}

    def readout(self, outputs: FeatureMap, cloud: PointCloud) -> Node:
        query = cloud.num_points - 1
        scalar = SCALAR_GAIN * ops.mean(ops.gather(outputs[0], [query], axis=0), axis=(0, 1))
        tensor = TENSOR_GAIN * ops.mean(ops.gather(outputs[2], [query], axis=0), axis=(0, 1))
        return ops.contract("k,kij->ij", ops.concat([scalar, tensor], axis=0), EMBEDDING_BASIS)

    def loss(self, prediction: Node, sample: LabeledSample) -> Node:
        return ops.mean(ops.square(prediction - sample.target_array()))

    def prediction_features(self, prediction: np.ndarray) -> Dict[int, np.ndarray]:
        s, v = irreps_from_symmetric(prediction)
        return {0: np.reshape(s, (1, 1, 1)), 2: np.reshape(v, (1, 1, 5))}

    def score(self, predictions: Sequence[np.ndarray], samples: Sequence[LabeledSample]) -> Dict[str, float]:
        predictions = np.stack(predictions)
        targets = np.stack([s.target_array() for s in samples])
        target_rms = float(np.sqrt(np.mean(targets**2)))
        mae = float(np.mean(np.abs(predictions - targets)))
        asymmetry = float(np.max(np.abs(predictions - np.swapaxes(predictions, -1, -2))))
        return {
            "mae": mae,
            "target_rms": target_rms,
            "relative_mae": mae / target_rms if target_rms else float("nan"),
            "max_asymmetry": asymmetry,
        }

    def analytic_radials(self):
        return {
            SCALAR_KEY: lambda r: (2.0 / 3.0) * np.asarray(r, dtype=np.float64) ** 2,
            TENSOR_KEY: lambda r: -np.asarray(r, dtype=np.float64) ** 2,
        }

    def recovery_range(self, samples: Optional[Sequence[LabeledSample]] = None) -> Tuple[float, float]:
        """From the mean minimum distance up to the largest distance in the cube."""
        samples = samples if samples is not None else self.train_samples()
        return mean_minimum_distance(samples), min(self.config.radial_max, CUBE_SIDE * np.sqrt(3.0))
