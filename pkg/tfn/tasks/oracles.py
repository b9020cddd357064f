"""
Independent reference implementations used to check the generators and the
learned radial functions.

The loops here share no code with the vectorized generators.
"""

from typing import Callable, Tuple

import numpy as np


def gravity_oracle(positions, masses) -> np.ndarray:
    """Direct pairwise sum of -m_b (r_a - r_b) / |r_a - r_b|^3."""
    positions = [np.asarray(p, dtype=np.float64) for p in positions]
    result = np.zeros((len(positions), 3))
    for a, r_a in enumerate(positions):
        for b, r_b in enumerate(positions):
            if a == b:
                continue
            offset = r_a - r_b
            distance = np.sqrt(offset @ offset)
            result[a] -= masses[b] * offset / distance**3
    return result


def inertia_oracle(positions, masses, query) -> np.ndarray:
    """Entry-by-entry sum of m (r.r delta_ij - r_i r_j) about ``query``."""
    query = np.asarray(query, dtype=np.float64)
    result = np.zeros((3, 3))
    for position, mass in zip(positions, masses):
        r = np.asarray(position, dtype=np.float64) - query
        for i in range(3):
            for j in range(3):
                result[i, j] += mass * ((r @ r) * (i == j) - r[i] * r[j])
    return result


def fit_scale(learned: np.ndarray, analytic: np.ndarray) -> float:
    """Least-squares scale s minimising |s learned - analytic|."""
    learned = np.asarray(learned, dtype=np.float64)
    analytic = np.asarray(analytic, dtype=np.float64)
    norm = float(learned @ learned)
    return float(learned @ analytic) / norm if norm > 0.0 else 0.0


def radial_recovery_error(
    radial: Callable[[np.ndarray], np.ndarray],
    analytic: Callable[[np.ndarray], np.ndarray],
    r_min: float,
    r_max: float,
    steps: int = 200,
) -> Tuple[float, float]:
    """
    Mean relative error of a learned radial after one global scale fit.

    Returns:
        (mean relative error, fitted scale)
    """
    if r_max <= r_min:
        raise ValueError(f"empty comparison range [{r_min}, {r_max}]")
    r = np.linspace(r_min, r_max, steps)
    learned = np.asarray(radial(r), dtype=np.float64).reshape(-1)
    target = np.asarray(analytic(r), dtype=np.float64)
    scale = fit_scale(learned, target)
    error = np.abs(scale * learned - target) / np.abs(target)
    return float(np.mean(error)), scale
