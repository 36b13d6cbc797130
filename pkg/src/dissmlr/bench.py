"""Error-versus-k comparison of HCA, HCA + multi-level refinement and RKM."""
from __future__ import annotations

import time
from dataclasses import dataclass, fields

from .core import DissimilarityMatrix, Partition
from .errors import KOutOfRange
from .hca import cut_labels, fast_hca
from .mlr import DEFAULT_ALPHA, DEFAULT_EPSILON, multi_level_refine
from .rkm import rkm_best_of


@dataclass(frozen=True)
class BenchRecord:
    k: int
    e_hca: float
    e_mlr: float
    e_rkm_best: float
    e_rkm_worst: float
    t_hca_ms: float
    t_mlr_ms: float
    t_rkm_ms: float


BENCH_FIELDS = [f.name for f in fields(BenchRecord)]


def _error(D, labels) -> float:
    # canonical labels fix the summation order, so equal partitions tie exactly
    return Partition.from_labels(D, labels).canonical().error()


def bench_run(D: DissimilarityMatrix, k_min: int, k_max: int, alpha: float = DEFAULT_ALPHA,
              restarts: int = 20, master_seed: int = 0, epsilon: float = DEFAULT_EPSILON,
              checked: bool = False) -> list[BenchRecord]:
    """One :class:`BenchRecord` per ``k`` in ``k_min..k_max``.

    The dendrogram is built once; ``t_hca_ms`` is its build time plus the cut.
    """
    if not 2 <= k_min <= k_max < D.n:
        raise KOutOfRange(f"need 2 <= k_min <= k_max < {D.n}, got {k_min}..{k_max}")
    t0 = time.perf_counter()
    dend, _ = fast_hca(D, checked=checked)
    t_build = time.perf_counter() - t0

    records = []
    for k in range(k_min, k_max + 1):
        t0 = time.perf_counter()
        hca_labels = cut_labels(dend, k)
        t_hca = t_build + time.perf_counter() - t0

        t0 = time.perf_counter()
        refined, _ = multi_level_refine(D, dend, k, alpha, epsilon, checked=checked)
        t_mlr = time.perf_counter() - t0

        t0 = time.perf_counter()
        best, worst, _ = rkm_best_of(D, k, restarts, master_seed)
        t_rkm = time.perf_counter() - t0

        rec = BenchRecord(k, _error(D, hca_labels), _error(D, refined.labels),
                          _error(D, best.assignment.labels), _error(D, worst.assignment.labels),
                          1e3 * t_hca, 1e3 * t_mlr, 1e3 * t_rkm)
        assert rec.e_mlr <= rec.e_hca, f"refinement worsened the cut at k={k}"
        records.append(rec)
    return records
