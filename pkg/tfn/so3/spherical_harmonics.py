"""
Real spherical harmonics, orthonormal over the unit sphere.

Convention (used everywhere in the package):
  * components are ordered m = -l, ..., l;
  * m > 0 carries cos(m phi), m < 0 carries sin(|m| phi), no Condon-Shortley
    phase, so every leading coefficient is positive;
  * hence l = 1 is sqrt(3 / 4 pi) * (y, z, x), and D^(1) equals the rotation
    matrix conjugated by the (x, y, z) -> (y, z, x) permutation.

Values are computed from the Herglotz generating function, which is exact
for any order.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import comb, factorial

from shared.utils.errors import DegenerateDirectionError

from .rotation import Rotation

# Index of x, y, z inside an l = 1 component vector (m = -1, 0, 1 -> y, z, x).
SH_FROM_CARTESIAN = np.array([1, 2, 0])
CARTESIAN_FROM_SH = np.array([2, 0, 1])

_DEGENERATE_NORM = 1e-12


def _quarter_turn(k: int) -> Tuple[int, int]:
    """Exact (cos, sin) of k * pi / 2."""
    return [(1, 0), (0, 1), (-1, 0), (0, -1)][k % 4]


@lru_cache(maxsize=None)
def _legendre_terms(l: int, m: int) -> Tuple[float, Tuple[Tuple[float, int], ...]]:
    """Prefactor and (coefficient, power of z) terms of the normalized P_l^m."""
    prefactor = np.sqrt(factorial(l - m, exact=True) / factorial(l + m, exact=True))
    terms = []
    for k in range((l - m) // 2 + 1):
        coefficient = (
            (-1) ** k
            * comb(l, k, exact=True)
            * comb(2 * l - 2 * k, l, exact=True)
            * factorial(l - 2 * k, exact=True)
            // factorial(l - 2 * k - m, exact=True)
        )
        terms.append((coefficient / 2.0**l, l - 2 * k - m))
    return float(prefactor), tuple(terms)


def _polar_part(l: int, m: int, z: np.ndarray) -> np.ndarray:
    prefactor, terms = _legendre_terms(l, m)
    total = np.zeros_like(z)
    for coefficient, power in terms:
        total = total + coefficient * z**power
    return prefactor * total


def _azimuthal_part(m: int, x: np.ndarray, y: np.ndarray, sine: bool) -> np.ndarray:
    """Re (cosine) or Im (sine) of (x + i y)^m."""
    total = np.zeros_like(x)
    for p in range(m + 1):
        cos_k, sin_k = _quarter_turn(m - p)
        weight = sin_k if sine else cos_k
        if weight:
            total = total + weight * comb(m, p, exact=True) * x**p * y ** (m - p)
    return total


def _unit_vectors(direction: np.ndarray) -> np.ndarray:
    direction = np.asarray(direction, dtype=np.float64)
    if direction.shape[-1] != 3:
        raise ValueError(f"directions must have a trailing axis of 3, got {direction.shape}")
    norms = np.linalg.norm(direction, axis=-1, keepdims=True)
    if np.any(norms < _DEGENERATE_NORM):
        raise DegenerateDirectionError(
            "spherical harmonics are undefined at r = 0; mask the self-pair instead"
        )
    return direction / norms


def _evaluate(l: int, unit: np.ndarray) -> np.ndarray:
    x, y, z = unit[..., 0], unit[..., 1], unit[..., 2]
    components = []
    for m in range(-l, l + 1):
        if m == 0:
            value = np.sqrt(2 * l + 1) * _polar_part(l, 0, z)
        else:
            value = (
                np.sqrt(2 * (2 * l + 1))
                * _polar_part(l, abs(m), z)
                * _azimuthal_part(abs(m), x, y, sine=m < 0)
            )
        components.append(value)
    return np.stack(components, axis=-1) / np.sqrt(4.0 * np.pi)


def real_spherical_harmonics(l: int, direction: np.ndarray) -> np.ndarray:
    """
    Evaluate Y^(l) at one or many directions.

    Args:
        l: Rotation order (non-negative)
        direction: Array of shape [..., 3]; normalized internally

    Returns:
        Array of shape [..., 2l + 1]

    Raises:
        DegenerateDirectionError: If any direction has zero length
    """
    if l < 0:
        raise ValueError(f"rotation order must be non-negative, got {l}")
    return _evaluate(l, _unit_vectors(direction))


def spherical_harmonics_masked(l: int, vectors: np.ndarray) -> np.ndarray:
    """
    Y^(l) of displacement vectors with the r = 0 convention applied.

    Zero-length vectors get the constant Y^(0) for l = 0 and zeros for l > 0,
    the only rotation-invariant choices.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=-1)
    degenerate = norms < _DEGENERATE_NORM
    safe = np.where(degenerate[..., None], np.array([0.0, 0.0, 1.0]), vectors)
    values = _evaluate(l, safe / np.linalg.norm(safe, axis=-1, keepdims=True))
    if l > 0:
        values = np.where(degenerate[..., None], 0.0, values)
    return values


def sh_equivariance_residual(l: int, rotation: Rotation, direction: np.ndarray) -> float:
    """Norm of Y(R r) - D(R) Y(r); zero up to round-off."""
    from .wigner import wigner_d

    direction = np.asarray(direction, dtype=np.float64)
    rotated = real_spherical_harmonics(l, rotation.apply(direction))
    transformed = real_spherical_harmonics(l, direction) @ wigner_d(l, rotation).matrix.T
    return float(np.max(np.linalg.norm(rotated - transformed, axis=-1)))


def sphere_quadrature(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Product Gauss-Legendre x trapezoid rule on the unit sphere.

    Exact for polynomials in (x, y, z) up to the given total degree.

    Returns:
        (directions [n, 3], weights [n]) with weights summing to 4 pi
    """
    n_polar = degree // 2 + 1
    n_azimuth = degree + 1
    nodes, polar_weights = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    cos_t, ph = np.meshgrid(nodes, phi, indexing="ij")
    sin_t = np.sqrt(1.0 - cos_t**2)
    directions = np.stack([sin_t * np.cos(ph), sin_t * np.sin(ph), cos_t], axis=-1).reshape(-1, 3)
    weights = np.repeat(polar_weights, n_azimuth) * (2.0 * np.pi / n_azimuth)
    return directions, weights


def sh_orthonormality_residual(l_max: int) -> float:
    """Max deviation of the quadrature Gram matrix of all Y^(l <= l_max) from I."""
    directions, weights = sphere_quadrature(2 * l_max)
    basis = np.concatenate(
        [real_spherical_harmonics(l, directions) for l in range(l_max + 1)], axis=-1
    )
    gram = basis.T @ (weights[:, None] * basis)
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def sh_to_cartesian(vector: np.ndarray) -> np.ndarray:
    """Reorder l = 1 components (y, z, x) into (x, y, z) along the last axis."""
    return np.asarray(vector)[..., CARTESIAN_FROM_SH]


def cartesian_to_sh(vector: np.ndarray) -> np.ndarray:
    """Reorder (x, y, z) into l = 1 component order (y, z, x) along the last axis."""
    return np.asarray(vector)[..., SH_FROM_CARTESIAN]
