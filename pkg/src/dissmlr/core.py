"""Dissimilarity matrices, partitions and the quantization-error algebra.

All cluster sums count ordered pairs: for a cluster ``C`` the self-sum is
``sum(d[i, j] for i in C for j in C)``, so every unordered pair is counted
twice.  With that convention the error of a partition is

    E = sum over clusters C of S_C / |C|

and the sum of a union obeys ``S_{A u B} = S_A + S_B + 2 S_{A,B}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetryBeyondTolerance,
    BadPartition,
    DeadLabel,
    IndexOutOfRange,
    InvariantViolation,
    NegativeEntry,
    NonFiniteEntry,
    NonzeroDiagonal,
    NotSquare,
    SameCluster,
    UnitNotInSource,
    WouldEmptySourceCluster,
)

# Clusters smaller than this get their cached sums recomputed from scratch
# after shrinking, which bounds drift from repeated subtraction.
REFRESH_BELOW = 8


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """Validated dense dissimilarity matrix.

    Use :func:`validate_matrix` to build one; the wrapped array is made
    read-only so the object can be shared freely.
    """

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"DissimilarityMatrix(n={self.n})"


def validate_matrix(raw, tolerance: float = 1e-9) -> DissimilarityMatrix:
    """Check and normalise a raw square array of dissimilarities.

    Pairs whose asymmetry is within ``tolerance * max_entry`` are replaced by
    their average; diagonal entries with magnitude at most ``tolerance`` are
    set to zero.  Anything worse raises.
    """
    a = np.array(raw, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    bad = np.argwhere(~np.isfinite(a))
    if len(bad):
        raise NonFiniteEntry(*map(int, bad[0]))

    diag = np.diag(a)
    off = np.flatnonzero(np.abs(diag) > tolerance)
    if len(off):
        raise NonzeroDiagonal(int(off[0]))
    np.fill_diagonal(a, 0.0)

    scale = float(np.abs(a).max()) if a.size else 0.0
    asym = np.abs(a - a.T)
    bad = np.argwhere(np.triu(asym > tolerance * scale, 1))
    if len(bad):
        raise AsymmetryBeyondTolerance(*map(int, bad[0]))
    a = 0.5 * (a + a.T)

    bad = np.argwhere(np.triu(a < 0.0, 1))
    if len(bad):
        raise NegativeEntry(*map(int, bad[0]))
    # -0.0 would survive the check above; normalise it.
    a += 0.0
    a.setflags(write=False)
    return DissimilarityMatrix(a)


def _as_index_array(D: DissimilarityMatrix, objs) -> np.ndarray:
    idx = np.asarray(sorted(objs) if isinstance(objs, (set, frozenset)) else objs,
                     dtype=np.intp).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= D.n):
        raise IndexOutOfRange(f"object index outside 0..{D.n - 1}")
    return idx


def cross_sum(D: DissimilarityMatrix, A, B) -> float:
    """Sum of ``d(i, j)`` over ordered pairs ``i in A, j in B``."""
    a = _as_index_array(D, A)
    b = _as_index_array(D, B)
    if a.size == 0 or b.size == 0:
        return 0.0
    return float(D.values[np.ix_(a, b)].sum())


def union_sum(s_p, s_q, cross):
    """Self-sum of the union of two disjoint clusters.

    Works elementwise on arrays; the evaluation order is fixed so that scalar
    and vectorised callers get bit-identical results.
    """
    return s_p + s_q + 2.0 * cross


def linkage(s_p, n_p, s_q, n_q, cross):
    """Error increase caused by merging two clusters.

    Symmetric in (p, q) bit for bit, and elementwise over arrays.
    """
    return union_sum(s_p, s_q, cross) / (n_p + n_q) - (s_p / n_p + s_q / n_q)


def cluster_pair_sums(D: DissimilarityMatrix, labels: np.ndarray, c: int) -> np.ndarray:
    """All cluster-to-cluster cross sums, as a ``c x c`` array."""
    labels = np.asarray(labels, dtype=np.intp)
    idx = (labels[:, None] * c + labels[None, :]).ravel()
    return np.bincount(idx, weights=D.values.ravel(), minlength=c * c).reshape(c, c)


class Partition:
    """Hard assignment of objects to clusters ``0..c-1`` with cached sums.

    ``labels[i]`` is the cluster of object ``i``; ``sizes[c]`` and
    ``self_sums[c]`` cache the member count and ordered-pair self-sum of
    cluster ``c``.
    """

    def __init__(self, labels, sizes, self_sums):
        self.labels = np.asarray(labels, dtype=np.intp)
        self.sizes = np.asarray(sizes, dtype=np.intp)
        self.self_sums = np.asarray(self_sums, dtype=np.float64)

    @classmethod
    def from_labels(cls, D: DissimilarityMatrix, labels) -> "Partition":
        labels = np.array(labels, dtype=np.intp)
        if labels.shape != (D.n,):
            raise BadPartition(f"expected {D.n} labels, got shape {labels.shape}")
        if labels.size and labels.min() < 0:
            raise BadPartition("labels must be non-negative")
        c = int(labels.max()) + 1 if labels.size else 0
        sizes = np.bincount(labels, minlength=c)
        if np.any(sizes == 0):
            raise BadPartition(f"cluster {int(np.flatnonzero(sizes == 0)[0])} is empty")
        sums = np.diag(cluster_pair_sums(D, labels, c)).copy()
        return cls(labels, sizes, sums)

    @classmethod
    def singletons(cls, D: DissimilarityMatrix) -> "Partition":
        return cls(np.arange(D.n), np.ones(D.n, dtype=np.intp), np.zeros(D.n))

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.sizes.shape[0]

    def members(self, label: int) -> np.ndarray:
        self._check_label(label)
        return np.flatnonzero(self.labels == label)

    def clusters(self) -> list[list[int]]:
        return [self.members(c).tolist() for c in range(self.n_clusters)]

    def canonical(self) -> "Partition":
        """Copy relabelled so labels appear in order of smallest member."""
        _, first = np.unique(self.labels, return_index=True)
        order = np.argsort(first)
        remap = np.empty_like(order)
        remap[order] = np.arange(order.size)
        return Partition(remap[self.labels], self.sizes[order], self.self_sums[order])

    def copy(self) -> "Partition":
        return Partition(self.labels.copy(), self.sizes.copy(), self.self_sums.copy())

    def error(self) -> float:
        return float(np.sum(self.self_sums / self.sizes))

    def move(self, D: DissimilarityMatrix, unit, q: int) -> float:
        """Move the objects in ``unit`` (all from one cluster) to cluster ``q``.

        Cached sums are updated incrementally. Returns the error change.
        """
        u = _as_index_array(D, unit)
        p, s_u, w_up, w_uq = self._move_terms(D, u, q)
        delta = _move_delta_terms(s_u, u.size, self.self_sums[p], self.sizes[p],
                                  self.self_sums[q], self.sizes[q], w_up, w_uq)
        self.self_sums[q] = union_sum(s_u, self.self_sums[q], w_uq)
        self.self_sums[p] = self.self_sums[p] + s_u - 2.0 * w_up
        self.sizes[q] += u.size
        self.sizes[p] -= u.size
        self.labels[u] = q
        if self.sizes[p] < REFRESH_BELOW:
            m = self.members(p)
            self.self_sums[p] = D.values[np.ix_(m, m)].sum()
        return float(delta)

    def verify(self, D: DissimilarityMatrix, rtol: float = 1e-9) -> None:
        """Raise :class:`InvariantViolation` if cached values have drifted."""
        fresh = Partition.from_labels(D, self.labels)
        if fresh.n_clusters != self.n_clusters or not np.array_equal(fresh.sizes, self.sizes):
            raise InvariantViolation("cluster sizes do not match labels")
        scale = np.maximum(np.abs(fresh.self_sums), 1.0)
        worst = np.max(np.abs(fresh.self_sums - self.self_sums) / scale, initial=0.0)
        if worst > rtol:
            raise InvariantViolation(f"cached self-sum drift {worst:.3g} exceeds {rtol:g}")

    def _check_label(self, label):
        if not 0 <= label < self.n_clusters:
            raise DeadLabel(f"no cluster labelled {label}")

    def _move_terms(self, D, u, q):
        if u.size == 0:
            raise UnitNotInSource("empty unit")
        p = int(self.labels[u[0]])
        if np.any(self.labels[u] != p):
            raise UnitNotInSource("unit spans several clusters")
        self._check_label(q)
        if q == p:
            raise SameCluster(f"unit already in cluster {q}")
        if u.size == self.sizes[p]:
            raise WouldEmptySourceCluster(f"moving the whole of cluster {p}")
        mp = np.flatnonzero(self.labels == p)
        mq = np.flatnonzero(self.labels == q)
        rows = D.values[u]
        return p, float(rows[:, u].sum()), float(rows[:, mp].sum()), float(rows[:, mq].sum())

    def __repr__(self):
        return f"Partition(n={self.n}, clusters={self.n_clusters})"


def partition_error(D: DissimilarityMatrix, P: Partition) -> float:
    """Quantization error of ``P`` computed from its cached sums."""
    if P.n != D.n:
        raise BadPartition(f"partition covers {P.n} objects, matrix has {D.n}")
    return P.error()


def merge_delta(P: Partition, p: int, q: int, cross: float) -> float:
    """Error increase of merging clusters ``p`` and ``q`` of ``P``.

    ``cross`` is the cross sum between the two clusters.
    """
    if p == q:
        raise SameCluster(f"cannot merge cluster {p} with itself")
    P._check_label(p)
    P._check_label(q)
    return float(linkage(P.self_sums[p], P.sizes[p], P.self_sums[q], P.sizes[q], cross))


def _move_delta_terms(s_u, n_u, s_p, n_p, s_q, n_q, w_up, w_uq):
    # w_up includes the unit's own self-sum (the unit lies inside p).
    joined = union_sum(s_u, s_q, w_uq) / (n_u + n_q)
    left = (s_p + s_u - 2.0 * w_up) / (n_p - n_u)
    return joined - s_q / n_q - s_p / n_p + left


def move_delta(D: DissimilarityMatrix, P: Partition, unit, p: int, q: int) -> float:
    """Error change of moving ``unit`` (a strict subset of cluster ``p``) to ``q``."""
    u = _as_index_array(D, unit)
    P._check_label(p)
    if u.size == 0 or np.any(P.labels[u] != p):
        raise UnitNotInSource(f"unit is not contained in cluster {p}")
    _, s_u, w_up, w_uq = P._move_terms(D, u, q)
    return float(_move_delta_terms(s_u, u.size, P.self_sums[p], P.sizes[p],
                                   P.self_sums[q], P.sizes[q], w_up, w_uq))
