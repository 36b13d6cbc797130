"""Multi-level refinement of a dendrogram cut.

A target partition with ``k`` clusters is improved by greedy moves at
several levels of the hierarchy, coarsest first.  At a level with ``s``
clusters every cluster of ``cut(dend, s)`` is a *unit* that moves as a
whole between target clusters, so dense groups of objects can change
cluster in a single step.  The last level is the singleton level, where the
procedure is plain single-object greedy refinement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import REFRESH_BELOW, DissimilarityMatrix, Partition, cluster_pair_sums, union_sum
from .errors import AlphaOutOfRange, InvariantViolation, KOutOfRange, ViewDoesNotRefineTarget
from .hca import Dendrogram, cut, cut_labels

DEFAULT_ALPHA = 0.75
DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class RefinementSchedule:
    alpha: float
    target_k: int
    level_sizes: tuple[int, ...]


def _ceil(x: float) -> int:
    # alpha * s is often an integer up to one ulp (0.7 * 10 == 7.000000000000001)
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def select_levels(n: int, alpha: float, target_k: int) -> RefinementSchedule:
    """Geometric schedule ``n, ceil(alpha n), ceil(alpha^2 n), ...`` above ``target_k``.

    A step that would not shrink the level (``ceil(alpha s) == s``) is forced
    down by one so every level differs from the previous one.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    if not 1 <= target_k < n:
        raise KOutOfRange(f"target_k must lie in 1..{n - 1}, got {target_k}")
    sizes = [n]
    while True:
        s = min(_ceil(alpha * sizes[-1]), sizes[-1] - 1)
        if s <= target_k:
            break
        sizes.append(s)
    return RefinementSchedule(alpha, target_k, tuple(sizes))


class LevelView:
    """Units of one hierarchy level, seen as a partition of the target clusters.

    ``unit_of[i]`` is the unit containing object ``i``; ``coarse[u]`` is the
    target cluster currently holding unit ``u``.  ``cross`` holds the
    unit-to-unit cross sums (ordered pairs), so ``cross[u, u]`` is the unit's
    self-sum.
    """

    def __init__(self, D: DissimilarityMatrix, unit_of, target: Partition):
        unit_of = np.asarray(unit_of, dtype=np.intp)
        n_units = int(unit_of.max()) + 1
        coarse = np.full(n_units, -1, dtype=np.intp)
        coarse[unit_of] = target.labels
        if np.any(coarse < 0) or np.any(coarse[unit_of] != target.labels):
            raise ViewDoesNotRefineTarget("a unit spans several target clusters")
        self.unit_of = unit_of
        self.coarse = coarse
        self.sizes = np.bincount(unit_of, minlength=n_units)
        self.cross = cluster_pair_sums(D, unit_of, n_units)

    @classmethod
    def from_dendrogram(cls, D, dend: Dendrogram, size: int, target: Partition) -> "LevelView":
        return cls(D, cut_labels(dend, size), target)

    @property
    def n_units(self) -> int:
        return self.sizes.shape[0]

    @property
    def self_sums(self) -> np.ndarray:
        return np.diag(self.cross)

    def verify(self, D: DissimilarityMatrix, rtol: float = 1e-9) -> None:
        fresh = cluster_pair_sums(D, self.unit_of, self.n_units)
        scale = np.maximum(np.abs(fresh), 1.0)
        if np.max(np.abs(fresh - self.cross) / scale) > rtol:
            raise InvariantViolation("unit cross sums drifted")


@dataclass(frozen=True)
class MoveRecord:
    unit: int
    source: int
    dest: int
    delta: float
    error_before: float
    error_after: float


def fast_greedy(D: DissimilarityMatrix, target: Partition, view: LevelView,
                epsilon: float = DEFAULT_EPSILON, checked: bool = False,
                trace: list | None = None):
    """Best-improvement local search moving whole units between target clusters.

    Units are visited in order of their smallest member.  For each unit the
    move with the most negative error change is applied when it beats
    ``-epsilon * max(1, |E|)``.  A unit that makes up its whole cluster never
    moves.  Sweeps repeat until one completes without a move.

    Returns ``(partition, moves)``; ``target`` is left untouched.  Accepted
    moves are appended to ``trace`` as :class:`MoveRecord` when given.
    """
    if view.unit_of.shape[0] != target.n or np.any(view.coarse[view.unit_of] != target.labels):
        raise ViewDoesNotRefineTarget("view does not refine the target partition")
    k = target.n_clusters
    coarse = view.coarse.copy()
    sizes = target.sizes.astype(np.float64)
    sums = target.self_sums.copy()
    C = view.cross
    u_sums = np.diag(C).copy()
    u_sizes = view.sizes.astype(np.float64)
    # W[u, q]: cross sum between unit u and target cluster q (u's own sum included)
    onehot = np.zeros((view.n_units, k))
    onehot[np.arange(view.n_units), coarse] = 1.0
    W = C @ onehot

    _, first = np.unique(view.unit_of, return_index=True)
    order = np.argsort(first)
    error = float(np.sum(sums / sizes))
    moves = 0
    while True:
        moved = 0
        for u in order:
            p = coarse[u]
            nu = u_sizes[u]
            if nu == sizes[p]:
                continue
            s_u = u_sums[u]
            left = sums[p] + s_u - 2.0 * W[u, p]
            joined = union_sum(s_u, sums, W[u])
            delta = (joined / (nu + sizes) - sums / sizes
                     - sums[p] / sizes[p] + left / (sizes[p] - nu))
            delta[p] = np.inf
            q = int(np.argmin(delta))
            d = float(delta[q])
            if not d < -epsilon * max(1.0, abs(error)):
                continue

            col = C[:, u]
            W[:, p] -= col
            W[:, q] += col
            sums[p] = left
            sums[q] = joined[q]
            sizes[p] -= nu
            sizes[q] += nu
            coarse[u] = q
            if sizes[p] < REFRESH_BELOW:
                in_p = np.flatnonzero(coarse == p)
                W[:, p] = C[:, in_p].sum(axis=1)
                sums[p] = C[np.ix_(in_p, in_p)].sum()
            before = error
            error = float(np.sum(sums / sizes))
            moved += 1
            if trace is not None:
                trace.append(MoveRecord(int(u), int(p), q, d, before, error))
            if checked:
                _check_state(D, view, coarse, sizes, sums, W, before, d)
        moves += moved
        if not moved:
            break

    labels = coarse[view.unit_of]
    return Partition(labels, sizes.astype(np.intp), sums), moves


def _check_state(D, view, coarse, sizes, sums, W, before, delta, rtol=1e-9):
    fresh = Partition.from_labels(D, coarse[view.unit_of])
    cached = Partition(fresh.labels, sizes.astype(np.intp), sums)
    cached.verify(D, rtol)
    onehot = np.zeros((view.n_units, sizes.size))
    onehot[np.arange(view.n_units), coarse] = 1.0
    W_fresh = view.cross @ onehot
    if np.max(np.abs(W_fresh - W) / np.maximum(np.abs(W_fresh), 1.0)) > rtol:
        raise InvariantViolation("unit-to-cluster sums drifted")
    actual = fresh.error() - before
    if abs(actual - delta) > rtol * max(1.0, abs(before)):
        raise InvariantViolation(f"move delta {delta!r} but error changed by {actual!r}")


def multi_level_refine(D: DissimilarityMatrix, dend: Dendrogram, target_k: int,
                       alpha: float = DEFAULT_ALPHA, epsilon: float = DEFAULT_EPSILON,
                       checked: bool = False, trace: list | None = None):
    """Refine ``cut(dend, target_k)`` level by level, coarsest level first.

    Returns ``(partition, level_errors)`` where ``level_errors[m]`` is the
    error after refining at the ``m``-th level visited (coarsest first,
    singletons last).
    """
    schedule = select_levels(D.n, alpha, target_k)
    part = cut(dend, target_k, D)
    level_errors = []
    for size in reversed(schedule.level_sizes):
        view = LevelView.from_dendrogram(D, dend, size, part)
        if checked:
            view.verify(D)
        part, _ = fast_greedy(D, part, view, epsilon, checked=checked, trace=trace)
        level_errors.append(part.error())
    if checked:
        part.verify(D)
    return part, level_errors
