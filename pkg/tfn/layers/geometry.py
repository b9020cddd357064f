"""
Point clouds and the pairwise geometry the convolutions read from.
"""

from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from shared.utils.errors import ShapeMismatchError
from tfn.so3 import Rotation, spherical_harmonics_masked


class PointCloud(BaseModel):
    """Point positions plus optional per-point mass and discrete type."""

    positions: np.ndarray
    masses: Optional[np.ndarray] = None
    types: Optional[np.ndarray] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("positions", mode="before")
    @classmethod
    def check_positions(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=np.float64)
        if value.ndim != 2 or value.shape[1] != 3 or value.shape[0] < 1:
            raise ValueError(f"positions must have shape [n >= 1, 3], got {value.shape}")
        if not np.all(np.isfinite(value)):
            raise ValueError("positions must be finite")
        return value

    @field_validator("masses", mode="before")
    @classmethod
    def check_masses(cls, value: Optional[np.ndarray]) -> Optional[np.ndarray]:
        return None if value is None else np.array(value, dtype=np.float64).reshape(-1)

    @field_validator("types", mode="before")
    @classmethod
    def check_types(cls, value: Optional[np.ndarray]) -> Optional[np.ndarray]:
        return None if value is None else np.array(value, dtype=np.int64).reshape(-1)

    @model_validator(mode="after")
    def check_lengths(self) -> "PointCloud":
        n = self.positions.shape[0]
        for field, value in (("masses", self.masses), ("types", self.types)):
            if value is not None and value.shape != (n,):
                raise ValueError(f"{field} must have one entry per point ({n}), got {value.shape}")
        return self

    @property
    def num_points(self) -> int:
        return self.positions.shape[0]

    def rotated(self, rotation: Rotation) -> "PointCloud":
        return self.model_copy(update={"positions": rotation.apply(self.positions)})

    def translated(self, shift: np.ndarray) -> "PointCloud":
        return self.model_copy(update={"positions": self.positions + np.asarray(shift, dtype=np.float64)})

    def permuted(self, order: np.ndarray) -> "PointCloud":
        order = np.asarray(order)
        return PointCloud(
            positions=self.positions[order],
            masses=None if self.masses is None else self.masses[order],
            types=None if self.types is None else self.types[order],
        )


class PairGeometry:
    """
    Displacements r_ab = r_a - r_b over all ordered pairs, self-pairs included.

    Spherical harmonics use the r = 0 convention of
    ``spherical_harmonics_masked``: the self-pair contributes only through
    l = 0.
    """

    def __init__(self, positions: np.ndarray):
        positions = np.asarray(positions, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise ShapeMismatchError("positions must be [n, 3]", positions.shape)
        self.positions = positions
        self.vectors = positions[:, None, :] - positions[None, :, :]
        self.distances = np.linalg.norm(self.vectors, axis=-1)
        self._harmonics: Dict[int, np.ndarray] = {}
        self._masks: Dict[float, np.ndarray] = {}

    @classmethod
    def from_cloud(cls, cloud: PointCloud) -> "PairGeometry":
        return cls(cloud.positions)

    @property
    def num_points(self) -> int:
        return self.positions.shape[0]

    def harmonics(self, l: int) -> np.ndarray:
        """Y^(l)(r_ab) of shape [n, n, 2l + 1]."""
        if l not in self._harmonics:
            self._harmonics[l] = spherical_harmonics_masked(l, self.vectors)
        return self._harmonics[l]

    def cutoff_mask(self, cutoff: Optional[float]) -> Optional[np.ndarray]:
        """1 where r_ab <= cutoff, else 0; None when every pair interacts."""
        if cutoff is None:
            return None
        if cutoff not in self._masks:
            self._masks[cutoff] = (self.distances <= cutoff).astype(np.float64)
        return self._masks[cutoff]
