"""
Orthonormal 0 (+) 2 encoding of symmetric 3x3 matrices.

A symmetric matrix M splits into an isotropic part and a traceless part.
The l = 0 coordinate is s = tr(M) / sqrt(3) and the l = 2 coordinates are the
components of the traceless part in the real spherical-harmonic basis, scaled
so that the map is an isometry for the Frobenius norm:

    ||M||_F^2 = s^2 + ||v||^2

For a unit vector r the traceless matrix r r^T - I/3 encodes to
v = sqrt(8 pi / 15) * Y^(2)(r).
"""

from typing import Tuple

import numpy as np

from shared.utils.errors import ShapeMismatchError

# Leading coefficients of the real l = 2 harmonics: xy, yz, xz carry C1,
# 3z^2 - 1 carries C0.
C1 = 0.5 * np.sqrt(15.0 / np.pi)
C0 = 0.25 * np.sqrt(5.0 / np.pi)

# Frobenius norm of E(v) per unit of ||v||, inverted.
ALPHA = np.sqrt(15.0 / (8.0 * np.pi))


def _traceless_from_sh(v: np.ndarray) -> np.ndarray:
    """E(v): the traceless matrix whose harmonic coordinates are v (E(Y(r)) = r r^T - I/3)."""
    v_m2, v_m1, v_0, v_1, v_2 = (v[..., k] for k in range(5))
    diagonal = v_0 / (6.0 * C0)
    xx = v_2 / C1 - diagonal
    yy = -v_2 / C1 - diagonal
    zz = v_0 / (3.0 * C0)
    xy = v_m2 / C1
    yz = v_m1 / C1
    xz = v_1 / C1
    return np.stack(
        [
            np.stack([xx, xy, xz], axis=-1),
            np.stack([xy, yy, yz], axis=-1),
            np.stack([xz, yz, zz], axis=-1),
        ],
        axis=-2,
    )


def symmetric_from_irreps(s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Assemble symmetric matrices from l = 0 and l = 2 coordinates.

    Args:
        s: Scalars of shape [...] (or [..., 1])
        v: l = 2 coordinates of shape [..., 5], ordered m = -2..2

    Returns:
        Matrices of shape [..., 3, 3]
    """
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != 5:
        raise ShapeMismatchError("l = 2 coordinates need a trailing axis of 5", v.shape)
    if s.ndim == v.ndim and s.shape[-1] == 1:
        s = s[..., 0]
    isotropic = s[..., None, None] * np.eye(3) / np.sqrt(3.0)
    return isotropic + ALPHA * _traceless_from_sh(v)


def irreps_from_symmetric(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Inverse of ``symmetric_from_irreps``; the antisymmetric part is discarded.

    Returns:
        (s of shape [...], v of shape [..., 5])
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape[-2:] != (3, 3):
        raise ShapeMismatchError("symmetric matrices must be 3x3", m.shape[-2:], (3, 3))
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    trace = np.trace(m, axis1=-2, axis2=-1)
    traceless = m - trace[..., None, None] * np.eye(3) / 3.0
    v = np.stack(
        [
            C1 * traceless[..., 0, 1],
            C1 * traceless[..., 1, 2],
            3.0 * C0 * traceless[..., 2, 2],
            C1 * traceless[..., 0, 2],
            0.5 * C1 * (traceless[..., 0, 0] - traceless[..., 1, 1]),
        ],
        axis=-1,
    )
    return trace / np.sqrt(3.0), v / ALPHA
