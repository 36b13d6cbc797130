"""Clustering of dissimilarity data by minimising the quantization error.

Typical use::

    from dissmlr import validate_matrix, fast_hca, cut, multi_level_refine

    D = validate_matrix(raw)
    dend, _ = fast_hca(D)
    part, _ = multi_level_refine(D, dend, target_k=5)
"""
from .core import (
    DissimilarityMatrix,
    Partition,
    cross_sum,
    merge_delta,
    move_delta,
    partition_error,
    union_sum,
    validate_matrix,
)
from .hca import Dendrogram, MergeStep, cut, cut_labels, fast_hca, naive_hca
from .mlr import LevelView, RefinementSchedule, fast_greedy, multi_level_refine, select_levels
from .rkm import RkmState, object_to_cluster_dissimilarity, rkm_best_of, rkm_run

__version__ = "0.1.0"
