"""
Rotations as unit quaternions.

Quaternions use the Hamilton convention (w, x, y, z); ``a.compose(b)`` is the
rotation that applies ``b`` first, so ``(a.compose(b)).matrix() ==
a.matrix() @ b.matrix()``.
"""

from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from shared.utils.errors import InvalidRotationError

SeedLike = Union[None, int, np.random.Generator]

_NORM_TOL = 1e-12


def _as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Rotation(BaseModel):
    """An element of SO(3) stored as a unit quaternion."""

    w: float
    x: float
    y: float
    z: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_unit_norm(self) -> "Rotation":
        norm = np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"quaternion norm {norm!r} is not 1 within {_NORM_TOL}")
        return self

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(w=1.0, x=0.0, y=0.0, z=0.0)

    @classmethod
    def from_quaternion(cls, quaternion: Sequence[float]) -> "Rotation":
        """Build from any nonzero quaternion (w, x, y, z); it is normalized."""
        q = np.asarray(quaternion, dtype=np.float64)
        if q.shape != (4,) or not np.all(np.isfinite(q)):
            raise InvalidRotationError(f"quaternion must be 4 finite reals, got {q!r}")
        norm = np.linalg.norm(q)
        if norm == 0.0:
            raise InvalidRotationError("zero quaternion does not define a rotation")
        q = q / norm
        return cls(w=float(q[0]), x=float(q[1]), y=float(q[2]), z=float(q[3]))

    @classmethod
    def from_axis_angle(cls, axis: Sequence[float], angle: float) -> "Rotation":
        """Right-handed rotation by ``angle`` radians about ``axis``."""
        axis = np.asarray(axis, dtype=np.float64)
        norm = np.linalg.norm(axis)
        if axis.shape != (3,) or norm == 0.0 or not np.isfinite(norm):
            raise InvalidRotationError(f"rotation axis must be a nonzero 3-vector, got {axis!r}")
        axis = axis / norm
        half = 0.5 * float(angle)
        return cls.from_quaternion(np.concatenate([[np.cos(half)], np.sin(half) * axis]))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Rotation":
        """Quaternion of a proper rotation matrix (Shepperd's method)."""
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise InvalidRotationError(f"rotation matrix must be 3x3, got {m.shape}")
        if not np.allclose(m @ m.T, np.eye(3), atol=1e-9) or np.linalg.det(m) < 0:
            raise InvalidRotationError("matrix is not a proper rotation")

        trace = np.trace(m)
        candidates = [trace, m[0, 0], m[1, 1], m[2, 2]]
        k = int(np.argmax(candidates))
        if k == 0:
            s = 2.0 * np.sqrt(1.0 + trace)
            q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        elif k == 1:
            s = 2.0 * np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
            q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        elif k == 2:
            s = 2.0 * np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
            q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        else:
            s = 2.0 * np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
            q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        return cls.from_quaternion(q)

    @classmethod
    def random(cls, seed: SeedLike = None) -> "Rotation":
        """Haar-uniform rotation: four standard normals, normalized."""
        rng = _as_generator(seed)
        while True:
            q = rng.standard_normal(4)
            if np.linalg.norm(q) > 1e-8:
                return cls.from_quaternion(q)

    @property
    def quaternion(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=np.float64)

    def matrix(self) -> np.ndarray:
        """3x3 rotation matrix."""
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ],
            dtype=np.float64,
        )

    def compose(self, other: "Rotation") -> "Rotation":
        """Rotation applying ``other`` first, then ``self``."""
        w1, v1 = self.w, np.array([self.x, self.y, self.z])
        w2, v2 = other.w, np.array([other.x, other.y, other.z])
        w = w1 * w2 - v1 @ v2
        v = w1 * v2 + w2 * v1 + np.cross(v1, v2)
        return Rotation.from_quaternion(np.concatenate([[w], v]))

    def __matmul__(self, other: "Rotation") -> "Rotation":
        return self.compose(other)

    def inverse(self) -> "Rotation":
        return Rotation(w=self.w, x=-self.x, y=-self.y, z=-self.z)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Rotate points of shape [..., 3]."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.matrix().T


def rotation_from_axis_angle(axis: Sequence[float], angle: float) -> Rotation:
    """Rotation by ``angle`` radians about ``axis`` (normalized internally)."""
    return Rotation.from_axis_angle(axis, angle)


def sample_random_rotation(rng_seed: SeedLike = None) -> Rotation:
    """Haar-uniform random rotation; deterministic for a fixed seed."""
    return Rotation.random(rng_seed)


def random_rotations(count: int, seed: Optional[int] = None) -> list:
    """A reproducible list of Haar-uniform rotations."""
    rng = np.random.default_rng(seed)
    return [Rotation.random(rng) for _ in range(count)]
