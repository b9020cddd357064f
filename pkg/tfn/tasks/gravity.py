"""
Newtonian gravity: predict the acceleration of every point mass.

    a_a = -sum_{b != a} m_b r_hat_ab / |r_ab|^2,   r_ab = r_a - r_b,  G = 1

A single 0 -> 1 convolution with masses as the l = 0 input can express this
exactly; its radial function has to become -1/r^2.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from shared.models.architecture import Architecture, ConvolutionRecord, FilterSpec, RadialConfig
from shared.models.sample import LabeledSample, TaskKind
from tfn.autodiff import Node, ops
from tfn.layers import FeatureMap, PointCloud, displacements_from_features
from tfn.so3 import cartesian_to_sh

from .base import BaseTask, register_task

logger = logging.getLogger(__name__)

MIN_POINTS = 2
MAX_POINTS = 10
MASS_RANGE = (0.5, 2.0)
CUBE_SIDE = 4.0
MIN_DISTANCE = 0.5

# Y^(1)(r_hat) = sqrt(3 / 4 pi) r_hat; the readout undoes that factor.
VECTOR_GAIN = np.sqrt(4.0 * np.pi / 3.0)

RADIAL_KEY = "lf1_li0"


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    diffs = positions[:, None, :] - positions[None, :, :]
    return np.linalg.norm(diffs, axis=-1)


def min_pair_distance(positions: np.ndarray) -> float:
    distances = pairwise_distances(positions)
    np.fill_diagonal(distances, np.inf)
    return float(np.min(distances))


def gravity_field(positions: np.ndarray, masses: np.ndarray) -> np.ndarray:
    """Acceleration of every point, shape [n, 3]."""
    positions = np.asarray(positions, dtype=np.float64)
    masses = np.asarray(masses, dtype=np.float64)
    vectors = positions[:, None, :] - positions[None, :, :]
    distances = np.linalg.norm(vectors, axis=-1)
    np.fill_diagonal(distances, np.inf)
    weights = masses[None, :] / distances**3
    return -np.einsum("ab,abx->ax", weights, vectors)


def sample_mass_cloud(rng: np.random.Generator, side: float, min_distance: float = 0.0):
    """
    Point count, masses and positions drawn uniformly inside a cube.

    Positions are re-drawn until every pair is at least ``min_distance`` apart.
    """
    n = int(rng.integers(MIN_POINTS, MAX_POINTS + 1))
    masses = rng.uniform(*MASS_RANGE, size=n)
    while True:
        positions = rng.uniform(-side / 2.0, side / 2.0, size=(n, 3))
        if min_distance <= 0.0 or min_pair_distance(positions) >= min_distance:
            return positions, masses


def gen_gravity(seed: int, index: int = 0) -> LabeledSample:
    rng = np.random.default_rng([seed, index])
    positions, masses = sample_mass_cloud(rng, CUBE_SIDE, MIN_DISTANCE)
    return LabeledSample(
        task=TaskKind.GRAVITY,
        seed=seed,
        index=index,
        positions=positions.tolist(),
        masses=masses.tolist(),
        target=gravity_field(positions, masses).tolist(),
    )


def build_gravity_net(radial: Optional[RadialConfig] = None, channels: int = 1) -> Architecture:
    """
    One 0 -> 1 convolution; nothing else.

    The radial basis defaults to 40 Gaussians over [0, 6], wider than the
    30-Gaussian bases of the other tasks, so pairs across the whole cube
    still get a resolved radial value.
    """
    radial = radial or RadialConfig(count=40, r_max=6.0)
    return Architecture(
        name="gravity",
        task=TaskKind.GRAVITY.value,
        l_max=1,
        input_channels={0: channels},
        layers=[ConvolutionRecord(paths=[FilterSpec(l_i=0, l_f=1, l_o=1, channels=channels)], radial=radial)],
    )


@register_task
class GravityTask(BaseTask):
    kind = TaskKind.GRAVITY
    metric = "mae"
    prediction_kind = "per_point"

    def generate(self, seed, count, rotate=True, translate=True, start=0) -> List[LabeledSample]:
        return [gen_gravity(seed, index) for index in range(start, start + count)]

    def architecture(self) -> Architecture:
        return build_gravity_net(self.radial_config(), self.config.channels)

    def encode(self, sample):
        masses = sample.masses_array()
        cloud = PointCloud(positions=sample.positions_array(), masses=masses)
        channels = self.config.channels
        return cloud, {0: np.repeat(masses[:, None, None], channels, axis=1)}

    def readout(self, outputs: FeatureMap, cloud: PointCloud) -> Node:
        vectors = ops.mean(outputs[1], axis=1)
        return VECTOR_GAIN * displacements_from_features(vectors)

    def loss(self, prediction: Node, sample: LabeledSample) -> Node:
        return ops.mean(ops.square(prediction - sample.target_array()))

    def prediction_features(self, prediction: np.ndarray) -> Dict[int, np.ndarray]:
        return {1: cartesian_to_sh(np.asarray(prediction))[:, None, :]}

    def score(self, predictions: Sequence[np.ndarray], samples: Sequence[LabeledSample]) -> Dict[str, float]:
        errors = np.concatenate([np.abs(p - s.target_array()).ravel() for p, s in zip(predictions, samples)])
        targets = np.concatenate([s.target_array().ravel() for s in samples])
        target_rms = float(np.sqrt(np.mean(targets**2)))
        mae = float(np.mean(errors))
        return {"mae": mae, "target_rms": target_rms, "relative_mae": mae / target_rms if target_rms else float("nan")}

    def analytic_radials(self):
        return {RADIAL_KEY: lambda r: -1.0 / np.asarray(r, dtype=np.float64) ** 2}

    def recovery_range(self, samples=None):
        return 0.6, 2.0
