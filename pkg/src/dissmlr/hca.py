"""Agglomerative clustering under the error-increase linkage.

Two builders produce the same dendrogram:

* :func:`naive_hca` rescans every live pair at every step (cubic time);
* :func:`fast_hca` keeps, for each live cluster, a nearest-neighbour
  candidate together with a lower bound on its best linkage, in a heap.
  Entries are only verified when they reach the top, so most
  nearest-neighbour searches are postponed until few clusters remain.

Cluster ids follow the usual convention: objects are ``0..N-1`` and the
cluster created at step ``t`` is ``N + t``.  Ties between equal linkages
are broken by the smallest ``(min_id, max_id)`` pair.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .core import DissimilarityMatrix, Partition, linkage, union_sum
from .errors import BadPartition, InvariantViolation, KOutOfRange, TooFewObjects


@dataclass(frozen=True)
class MergeStep:
    step: int
    left: int
    right: int
    delta_e: float
    error_after: float
    new_size: int


@dataclass
class Dendrogram:
    n: int
    steps: list[MergeStep] = field(default_factory=list)

    def __post_init__(self):
        if len(self.steps) != self.n - 1:
            raise BadPartition(f"a dendrogram over {self.n} objects needs {self.n - 1} steps")
        seen = set()
        for t, s in enumerate(self.steps):
            if s.step != t:
                raise BadPartition(f"step {t} is numbered {s.step}")
            for c in (s.left, s.right):
                if c in seen or not 0 <= c < self.n + t:
                    raise BadPartition(f"cluster {c} cannot be merged at step {t}")
                seen.add(c)

    def __len__(self):
        return len(self.steps)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(s.left, s.right) for s in self.steps]

    @property
    def deltas(self) -> np.ndarray:
        return np.array([s.delta_e for s in self.steps])

    def errors(self) -> np.ndarray:
        return np.array([s.error_after for s in self.steps])


@dataclass
class HcaStats:
    linkage_evaluations: int = 0
    queue_reinserts: int = 0
    bound_updates: int = 0
    stale_pops: int = 0


class _ClusterSet:
    """Slot-indexed storage of live clusters and their pairwise cross sums.

    A merged cluster reuses the slot of one of its parents, so the cross-sum
    matrix stays ``N x N``.
    """

    def __init__(self, D: DissimilarityMatrix):
        n = D.n
        self.n = n
        self.cross = np.array(D.values, dtype=np.float64)
        self.sums = np.zeros(n)
        self.sizes = np.ones(n)
        self.ids = np.arange(n)
        self.alive = np.ones(n, dtype=bool)
        self.slot_of = {i: i for i in range(n)}
        self.error = 0.0
        self.steps: list[MergeStep] = []

    def row_linkage(self, s: int, slots: np.ndarray) -> np.ndarray:
        return linkage(self.sums[s], self.sizes[s], self.sums[slots], self.sizes[slots],
                       self.cross[s, slots])

    def merge(self, sa: int, sb: int, delta: float) -> int:
        """Merge the clusters in slots ``sa`` and ``sb``; returns the new slot."""
        keep, drop = (sa, sb) if sa < sb else (sb, sa)
        a, b = int(self.ids[sa]), int(self.ids[sb])
        t = len(self.steps)
        new_id = self.n + t
        new_sum = union_sum(self.sums[sa], self.sums[sb], self.cross[sa, sb])
        row = self.cross[sa] + self.cross[sb]
        self.cross[keep] = row
        self.cross[:, keep] = row
        self.sums[keep] = new_sum
        self.sizes[keep] = self.sizes[sa] + self.sizes[sb]
        self.alive[drop] = False
        self.ids[keep] = new_id
        del self.slot_of[a], self.slot_of[b]
        self.slot_of[new_id] = keep
        self.error = self.error + delta
        self.steps.append(MergeStep(t, min(a, b), max(a, b), float(delta), float(self.error),
                                    int(self.sizes[keep])))
        return keep

    def global_minimum(self):
        """Exhaustive scan: (delta, lo_id, hi_id, slot_lo, slot_hi) of the best live pair."""
        live = np.flatnonzero(self.alive)
        L = linkage(self.sums[live, None], self.sizes[live, None],
                    self.sums[None, live], self.sizes[None, live],
                    self.cross[np.ix_(live, live)])
        np.fill_diagonal(L, np.inf)
        best = L.min()
        r, c = np.nonzero(L == best)
        ids = self.ids[live]
        lo = np.minimum(ids[r], ids[c])
        hi = np.maximum(ids[r], ids[c])
        k = np.lexsort((hi, lo))[0]
        return float(best), int(lo[k]), int(hi[k]), live.size


def naive_hca(D: DissimilarityMatrix) -> Dendrogram:
    """Reference builder: scan all live pairs at each of the ``N - 1`` steps."""
    return naive_hca_with_stats(D)[0]


def naive_hca_with_stats(D: DissimilarityMatrix):
    if D.n < 2:
        raise TooFewObjects("need at least two objects")
    n = D.n
    # Live clusters are kept packed in the leading block so that each scan
    # works on a contiguous view; a dropped slot is refilled from the end.
    cross = np.array(D.values, dtype=np.float64)
    sums = np.zeros(n)
    sizes = np.ones(n)
    ids = np.arange(n)
    stats = HcaStats()
    steps = []
    error = 0.0
    for t in range(n - 1):
        m = n - t
        L = linkage(sums[:m, None], sizes[:m, None], sums[None, :m], sizes[None, :m],
                    cross[:m, :m])
        stats.linkage_evaluations += m * (m - 1) // 2
        np.fill_diagonal(L, np.inf)
        best = L.min()
        r, c = np.nonzero(L == best)
        lo_id = np.minimum(ids[r], ids[c])
        hi_id = np.maximum(ids[r], ids[c])
        k = np.lexsort((hi_id, lo_id))[0]
        sa, sb = int(r[k]), int(c[k])
        a, b = int(ids[sa]), int(ids[sb])

        new_sum = union_sum(sums[sa], sums[sb], cross[sa, sb])
        row = cross[sa, :m] + cross[sb, :m]
        keep, drop = min(sa, sb), max(sa, sb)
        cross[keep, :m] = row
        cross[:m, keep] = row
        sums[keep] = new_sum
        sizes[keep] = sizes[sa] + sizes[sb]
        ids[keep] = n + t
        last = m - 1
        if drop != last:
            cross[drop, :m] = cross[last, :m]
            cross[:m, drop] = cross[:m, last]
            sums[drop], sizes[drop], ids[drop] = sums[last], sizes[last], ids[last]
        error = error + float(best)
        steps.append(MergeStep(t, min(a, b), max(a, b), float(best), float(error),
                               int(sizes[keep])))
    return Dendrogram(n, steps), stats


def fast_hca(D: DissimilarityMatrix, checked: bool = False):
    """Heap-of-candidates builder; returns ``(dendrogram, stats)``.

    Each live cluster ``i`` stores a candidate partner and a key
    ``(bound, lo, hi)`` that never exceeds the key of any live pair involving
    ``i``.  The smallest key is popped; if its candidate is alive and the
    linkage recomputed now still equals the stored bound bit for bit, the
    pair is the global minimum and is merged.  Otherwise the true nearest
    neighbour of ``i`` is searched and the entry pushed back.

    With ``checked=True`` every merge is confirmed against an exhaustive scan.
    """
    if D.n < 2:
        raise TooFewObjects("need at least two objects")
    n = D.n
    cs = _ClusterSet(D)
    stats = HcaStats()
    bound = np.empty(n)
    cand = np.empty(n, dtype=np.intp)
    version = np.zeros(n, dtype=np.intp)
    heap = []

    def nearest(s, live):
        others = live[live != s]
        row = cs.row_linkage(s, others)
        stats.linkage_evaluations += others.size
        best = row.min()
        # among equal linkages the smallest partner id gives the smallest pair key
        j = others[row == best]
        return float(best), int(cs.ids[j].min())

    def push(s):
        i, c = int(cs.ids[s]), int(cand[s])
        heapq.heappush(heap, (bound[s], min(i, c), max(i, c), s, version[s]))

    L0 = linkage(0.0, 1.0, 0.0, 1.0, cs.cross)
    np.fill_diagonal(L0, np.inf)
    stats.linkage_evaluations += n * (n - 1)
    bound[:] = L0.min(axis=1)
    cand[:] = np.argmax(L0 == bound[:, None], axis=1)
    del L0
    for s in range(n):
        push(s)

    while len(cs.steps) < n - 1:
        b, lo, hi, s, ver = heapq.heappop(heap)
        if not cs.alive[s] or ver != version[s]:
            stats.stale_pops += 1
            continue
        partner = cs.slot_of.get(int(cand[s]))
        if partner is not None:
            value = cs.row_linkage(s, np.array([partner]))[0]
            stats.linkage_evaluations += 1
        if partner is None or value != b:
            bound[s], cand[s] = nearest(s, np.flatnonzero(cs.alive))
            version[s] += 1
            stats.queue_reinserts += 1
            push(s)
            continue

        if checked:
            g_best, g_lo, g_hi, _ = cs.global_minimum()
            if (g_best, g_lo, g_hi) != (float(b), lo, hi):
                raise InvariantViolation(
                    f"step {len(cs.steps)}: committed ({lo}, {hi}, {b!r}) but the "
                    f"minimum is ({g_lo}, {g_hi}, {g_best!r})")

        keep = cs.merge(s, partner, b)
        version[s] += 1
        version[partner] += 1
        if len(cs.steps) == n - 1:
            break

        live = np.flatnonzero(cs.alive)
        others = live[live != keep]
        row = cs.row_linkage(keep, others)
        stats.linkage_evaluations += others.size

        # The new id exceeds every other id, so an equal linkage never beats
        # an existing key; only strictly smaller values lower a bound.
        lower = row < bound[others]
        for j, v in zip(others[lower], row[lower]):
            bound[j] = v
            cand[j] = cs.ids[keep]
            version[j] += 1
            push(j)
        stats.bound_updates += int(lower.sum())

        best = row.min()
        bound[keep] = best
        cand[keep] = cs.ids[others[row == best]].min()
        push(keep)

    return Dendrogram(n, cs.steps), stats


def cut_labels(dend: Dendrogram, k: int) -> np.ndarray:
    """Labels of the ``k``-cluster partition obtained by replaying ``N - k`` merges.

    Labels are ``0..k-1`` in order of each cluster's smallest member.
    """
    n = dend.n
    if not 1 <= k <= n:
        raise KOutOfRange(f"k must lie in 1..{n}, got {k}")
    parent = np.arange(2 * n - 1)
    for s in dend.steps[: n - k]:
        parent[s.left] = parent[s.right] = n + s.step

    def root(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    roots = np.array([root(i) for i in range(n)])
    _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    return remap[inverse.ravel()]


def cut(dend: Dendrogram, k: int, D: DissimilarityMatrix) -> Partition:
    """Partition with exactly ``k`` clusters, cached sums computed from ``D``."""
    if D.n != dend.n:
        raise BadPartition(f"dendrogram has {dend.n} objects, matrix has {D.n}")
    return Partition.from_labels(D, cut_labels(dend, k))
