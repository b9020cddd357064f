"""
Real Wigner D-matrices in the spherical-harmonic basis.

D^(l)(g) is defined by Y^(l)(R(g) r) = D^(l)(g) Y^(l)(r). It is built
recursively, D^(l) = C (D^(l-1) (x) D^(1)) C^T with C the real CG block
(l, l-1, 1), starting from D^(1) = P R P^T with P the (x, y, z) -> (y, z, x)
permutation. ``wigner_d_from_fit`` is an independent least-squares oracle.
"""

from typing import Dict, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from .clebsch_gordan import real_clebsch_gordan
from .rotation import Rotation, SeedLike, _as_generator
from .spherical_harmonics import SH_FROM_CARTESIAN, real_spherical_harmonics


class WignerD(BaseModel):
    """Real (2l+1) x (2l+1) representation matrix of one rotation."""

    l: int
    matrix: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("matrix", mode="before")
    @classmethod
    def freeze_matrix(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=np.float64)
        value.setflags(write=False)
        return value

    def orthogonality_residual(self) -> float:
        """Max-abs entry of D D^T - I."""
        return float(np.max(np.abs(self.matrix @ self.matrix.T - np.eye(2 * self.l + 1))))


def _sh_ordered_rotation(rotation: Rotation) -> np.ndarray:
    matrix = rotation.matrix()
    return matrix[np.ix_(SH_FROM_CARTESIAN, SH_FROM_CARTESIAN)]


def wigner_d_matrices(l_max: int, rotation: Rotation) -> Dict[int, np.ndarray]:
    """D^(l) for every l <= l_max, computed by one pass of the recursion."""
    if rotation == Rotation.identity():
        return {l: np.eye(2 * l + 1) for l in range(l_max + 1)}
    matrices = {0: np.ones((1, 1))}
    if l_max >= 1:
        matrices[1] = _sh_ordered_rotation(rotation)
    for l in range(2, l_max + 1):
        coupling = real_clebsch_gordan(l, l - 1, 1).reshape(2 * l + 1, -1)
        product = np.kron(matrices[l - 1], matrices[1])
        matrices[l] = coupling @ product @ coupling.T
    return matrices


def wigner_d(l: int, rotation: Rotation) -> WignerD:
    """
    Real Wigner D-matrix of order l.

    Examples:
        wigner_d(0, g).matrix == [[1.0]]
        wigner_d(1, g).matrix == R(g) with rows/columns reordered to (y, z, x)
    """
    if l < 0:
        raise ValueError(f"rotation order must be non-negative, got {l}")
    return WignerD(l=l, matrix=wigner_d_matrices(l, rotation)[l])


def wigner_d_from_fit(l: int, rotation: Rotation, seed: SeedLike = 0) -> np.ndarray:
    """
    Least-squares D^(l) from Y^(l) sampled at 4l + 2 random directions.

    Solves Y(R r_k) = D Y(r_k) for D; independent of the CG recursion.
    """
    rng = _as_generator(seed)
    directions = rng.standard_normal((4 * l + 2, 3))
    before = real_spherical_harmonics(l, directions)
    after = real_spherical_harmonics(l, rotation.apply(directions))
    transposed, *_ = np.linalg.lstsq(before, after, rcond=None)
    return transposed.T


def homomorphism_residual(l: int, g: Rotation, h: Rotation) -> float:
    """Max-abs entry of D(g) D(h) - D(g h)."""
    left = wigner_d(l, g).matrix @ wigner_d(l, h).matrix
    right = wigner_d(l, g.compose(h)).matrix
    return float(np.max(np.abs(left - right)))


def rotate_features(
    features: Dict[int, np.ndarray], rotation: Union[Rotation, Dict[int, np.ndarray]]
) -> Dict[int, np.ndarray]:
    """Apply D^(l) along the last axis of every order-l array."""
    if isinstance(rotation, Rotation):
        l_max = max(features) if features else 0
        matrices = wigner_d_matrices(l_max, rotation)
    else:
        matrices = rotation
    return {l: np.asarray(value) @ matrices[l].T for l, value in features.items()}
