"""Relational k-means: batch k-means driven only by pairwise dissimilarities.

The squared distance from object ``i`` to the implicit prototype of cluster
``C`` is ``S_{i,C} / |C| - S_C / (2 |C|^2)``; for squared Euclidean input
this is the squared distance to the centroid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import DissimilarityMatrix, Partition
from .errors import BadInitialPartition, BadParameters, DeadLabel

log = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 100


@dataclass
class RkmState:
    assignment: Partition
    iteration: int
    converged: bool

    @property
    def error(self) -> float:
        return self.assignment.error()


def object_to_cluster_dissimilarity(D: DissimilarityMatrix, P: Partition, i: int, q: int) -> float:
    if not 0 <= q < P.n_clusters:
        raise DeadLabel(f"no cluster labelled {q}")
    members = P.members(q)
    n_q = members.size
    return float(D.values[i, members].sum() / n_q - P.self_sums[q] / (2.0 * n_q * n_q))


def _dissimilarities(D: DissimilarityMatrix, labels: np.ndarray, k: int):
    """Object-to-cluster dissimilarities (N x k) for every object and cluster."""
    onehot = np.zeros((labels.size, k))
    onehot[np.arange(labels.size), labels] = 1.0
    cross = D.values @ onehot
    sizes = onehot.sum(axis=0)
    sums = np.einsum("ik,ik->k", onehot, cross)
    with np.errstate(divide="ignore", invalid="ignore"):
        diss = cross / sizes - sums / (2.0 * sizes * sizes)
    return diss, float(np.sum(sums / sizes))


def _repair(labels, diss, k, own):
    """Re-seed empty clusters with the objects farthest from their own cluster."""
    sizes = np.bincount(labels, minlength=k)
    taken = np.zeros(labels.size, dtype=bool)
    for q in np.flatnonzero(sizes == 0):
        eligible = (sizes[labels] > 1) & ~taken
        score = np.where(eligible, own, -np.inf)
        i = int(np.argmax(score))
        sizes[labels[i]] -= 1
        labels[i] = q
        sizes[q] = 1
        taken[i] = True
    return labels


def rkm_run(D: DissimilarityMatrix, k: int, initial: Partition,
            max_iter: int = DEFAULT_MAX_ITER) -> RkmState:
    """Batch relational k-means from ``initial``.

    Each pass reassigns every object to its closest cluster as measured
    against the clusters of the previous pass (ties go to the smallest
    label).  ``iteration`` counts passes that changed the assignment.
    """
    if initial.n != D.n or initial.n_clusters != k or np.any(initial.sizes == 0):
        raise BadInitialPartition(f"initial partition must have exactly {k} non-empty clusters")
    labels = initial.labels.copy()
    changing = 0
    converged = False
    prev_error = np.inf
    for _ in range(max_iter):
        diss, error = _dissimilarities(D, labels, k)
        if error > prev_error * (1 + 1e-12):
            log.debug("relational k-means error rose from %r to %r", prev_error, error)
        prev_error = error
        new = np.argmin(diss, axis=1)
        if np.bincount(new, minlength=k).min() == 0:
            own = diss[np.arange(D.n), new]
            new = _repair(new, diss, k, own)
        if np.array_equal(new, labels):
            converged = True
            break
        labels = new
        changing += 1
    return RkmState(Partition.from_labels(D, labels), changing, converged)


def random_partition(n: int, k: int, seed) -> np.ndarray:
    """Uniform labels in ``0..k-1``, with empty clusters filled by random donors."""
    if not 1 <= k <= n:
        raise BadParameters(f"k must lie in 1..{n}, got {k}")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, size=n)
    sizes = np.bincount(labels, minlength=k)
    for q in np.flatnonzero(sizes == 0):
        donors = np.flatnonzero(sizes[labels] > 1)
        i = donors[rng.integers(donors.size)]
        sizes[labels[i]] -= 1
        labels[i] = q
        sizes[q] = 1
    return labels


def rkm_best_of(D: DissimilarityMatrix, k: int, restarts: int, master_seed: int,
                max_iter: int = DEFAULT_MAX_ITER):
    """Run from ``restarts`` random starts (seed ``master_seed + r`` for start ``r``).

    Returns ``(best, worst, all_errors)``; ties keep the earliest restart.
    """
    if restarts < 1:
        raise BadParameters("restarts must be at least 1")
    if master_seed < 0:
        raise BadParameters("master_seed must be non-negative")
    runs = []
    for r in range(restarts):
        init = Partition.from_labels(D, random_partition(D.n, k, master_seed + r))
        runs.append(rkm_run(D, k, init, max_iter))
    errors = [s.error for s in runs]
    best = runs[int(np.argmin(errors))]
    worst = runs[int(np.argmax(errors))]
    return best, worst, errors
