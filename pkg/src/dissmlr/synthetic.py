"""Seeded Gaussian mixtures turned into squared Euclidean dissimilarities."""
from __future__ import annotations

import numpy as np

from .core import DissimilarityMatrix, validate_matrix
from .errors import BadParameters


def squared_euclidean(points) -> DissimilarityMatrix:
    """Exactly symmetric matrix of squared distances between rows of ``points``."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    diff = x[:, None, :] - x[None, :, :]
    return validate_matrix(np.einsum("ijk,ijk->ij", diff, diff))


def draw_centers(clusters: int, dims: int, separation: float, rng) -> np.ndarray:
    """Rejection-sample centres with pairwise distance at least ``separation``.

    The sampling box grows whenever a centre cannot be placed.
    """
    side = max(separation, 1.0) * max(clusters, 1) ** (1.0 / dims) * 2.0
    centers = []
    tries = 0
    while len(centers) < clusters:
        c = rng.uniform(0.0, side, size=dims)
        if all(np.sum((c - o) ** 2) >= separation**2 for o in centers):
            centers.append(c)
            tries = 0
            continue
        tries += 1
        if tries > 100:
            side *= 1.5
            tries = 0
    return np.array(centers).reshape(clusters, dims)


def gen_points(n: int, dims: int, clusters: int, spread: float, separation: float, seed):
    if n < 1 or dims < 1 or not 1 <= clusters <= n or spread < 0 or separation < 0:
        raise BadParameters(
            f"need n >= 1, dims >= 1, 1 <= clusters <= n, spread >= 0, separation >= 0 "
            f"(got n={n}, dims={dims}, clusters={clusters}, spread={spread}, "
            f"separation={separation})")
    rng = np.random.default_rng(seed)
    centers = draw_centers(clusters, dims, separation, rng)
    labels = np.arange(n) % clusters
    points = centers[labels] + spread * rng.standard_normal((n, dims))
    return points, labels


def gen_synthetic(n: int, dims: int, clusters: int, spread: float, separation: float, seed):
    """Return ``(D, true_labels)`` for a seeded isotropic Gaussian mixture.

    Objects are assigned to generating clusters round-robin.
    """
    points, labels = gen_points(n, dims, clusters, spread, separation, seed)
    return squared_euclidean(points), labels
