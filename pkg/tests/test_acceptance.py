"""Exit criteria for the package, one test per criterion.

Each test appends a PASS/FAIL line that is printed in the terminal summary.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from dissmlr.bench import bench_run
from dissmlr.core import Partition, validate_matrix
from dissmlr.hca import cut, cut_labels, fast_hca, naive_hca, naive_hca_with_stats
from dissmlr.mlr import multi_level_refine
from dissmlr.rkm import rkm_best_of
from dissmlr.synthetic import gen_points, gen_synthetic, squared_euclidean
from oracles import best_k_partition_error, kmeans_quantization_error, random_matrix

pytestmark = pytest.mark.slow

# Trend benchmark: 600 objects from 12 isotropic Gaussians in the plane, unit
# spread, centres at least 3 spreads apart (neighbouring clusters overlap).
TREND_SEEDS = list(range(10))
TREND = dict(n=600, dims=2, clusters=12, spread=1.0, separation=3.0)
TREND_K = (2, 30)
ALPHA = 0.75
RESTARTS = 20


def report(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")


def test_1_fast_matches_naive():
    rng = np.random.default_rng(2024)
    sizes = rng.integers(5, 201, size=50)
    mismatches = []
    worst = 0.0
    for case, n in enumerate(sizes):
        D = validate_matrix(random_matrix(int(n), 1000 + case))
        naive = naive_hca(D)
        fast, _ = fast_hca(D)
        if fast.pairs != naive.pairs:
            mismatches.append(case)
            continue
        a, b = fast.deltas, naive.deltas
        rel = np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)
        worst = max(worst, float(rel.max()))
    ok = not mismatches and worst <= 1e-12
    report(1, "fast HCA == naive HCA", ok,
           f"50 matrices, N in [{sizes.min()}, {sizes.max()}], mismatched={mismatches}, "
           f"max rel dE diff={worst:.1e} (tol 1e-12)")
    assert ok


def test_2_ward_equivalence():
    worst = 0.0
    for seed in range(20):
        x, _ = gen_points(100, 3, 5, 1.0, 3.0, seed)
        D = squared_euclidean(x)
        dend, _ = fast_hca(D)
        for k in range(1, 101):
            labels = cut_labels(dend, k)
            E = Partition.from_labels(D, labels).error()
            ref = 2.0 * kmeans_quantization_error(x, labels)
            if ref == 0.0:
                rel = abs(E)
            else:
                rel = abs(E - ref) / ref
            worst = max(worst, rel)
    ok = worst <= 1e-9
    report(2, "E(cut) == 2 x k-means error", ok,
           f"20 instances x k=1..100, max rel diff={worst:.1e} (tol 1e-9)")
    assert ok


def test_3_global_optimum_sandwich():
    rng = np.random.default_rng(7)
    failures = []
    for case in range(20):
        n = int(rng.integers(6, 11))
        D = validate_matrix(random_matrix(n, 500 + case))
        dend, _ = fast_hca(D)
        for k in (2, 3):
            best = best_k_partition_error(D.values, k)
            e_hca = cut(dend, k, D).error()
            e_mlr = multi_level_refine(D, dend, k, ALPHA, checked=True)[0].error()
            e_rkm = rkm_best_of(D, k, 50, case)[0].error
            tol = 1e-9 * max(1.0, best)
            if not (best - tol <= e_mlr <= e_hca and e_rkm >= best - tol):
                failures.append((case, k, best, e_mlr, e_hca, e_rkm))
    ok = not failures
    report(3, "E* <= E(MLR) <= E(HCA), E(RKM) >= E*", ok,
           f"20 instances N<=10, k in {{2,3}}, failures={failures}")
    assert ok


def _check_refinement(D, dend, k):
    trace = []
    P, errs = multi_level_refine(D, dend, k, ALPHA, checked=True, trace=trace)
    problems = []
    if any(b > a for a, b in zip(errs, errs[1:])):
        problems.append("level errors increase")
    if errs[0] > cut(dend, k, D).error():
        problems.append("first level worse than cut")
    for m in trace:
        if not (m.delta < -1e-12 * max(1.0, abs(m.error_before)) and m.error_after < m.error_before):
            problems.append(f"move {m} not improving")
    if P.n_clusters != k or np.any(P.sizes == 0):
        problems.append("cluster count changed")
    P.verify(D, rtol=1e-9)
    return problems, len(trace)


def test_4_refinement_monotone_and_conserving():
    cases = []
    for seed in range(6):
        D = validate_matrix(random_matrix(40 + 20 * seed, 800 + seed))
        cases.append(D)
        cases.append(gen_synthetic(120, 2, 6, 1.0, 2.5, seed)[0])
    problems, runs, moves = [], 0, 0
    for D in cases:
        dend, _ = fast_hca(D, checked=True)
        for k in (2, 5, 12):
            p, m = _check_refinement(D, dend, k)
            problems += p
            runs += 1
            moves += m
    ok = not problems and moves > 0
    report(4, "MLR monotone, conserving, sums exact (checked mode)", ok,
           f"{runs} runs, {moves} accepted moves, problems={problems[:3]}")
    assert ok


@pytest.fixture(scope="module")
def trend_bench():
    results = {}
    t0 = time.perf_counter()
    for seed in TREND_SEEDS:
        D, _ = gen_synthetic(seed=seed, **TREND)
        results[seed] = bench_run(D, *TREND_K, alpha=ALPHA, restarts=RESTARTS, master_seed=seed)
    return results, time.perf_counter() - t0


def test_5_hierarchical_beats_rkm_for_larger_k(trend_bench):
    results, elapsed = trend_bench
    winners = []
    losses = {}
    for seed, recs in results.items():
        lost = [r.k for r in recs if r.k >= 10 and r.e_mlr > r.e_rkm_best]
        if lost:
            losses[seed] = lost
        else:
            winners.append(seed)
    ok = len(winners) >= 8
    report(5, "HCA+MLR <= best-of-20 RKM for all k >= 10", ok,
           f"{len(winners)}/10 seeds (need 8), losing k by seed={losses}, "
           f"bench time {elapsed:.0f}s")
    assert ok


def test_6_fast_hca_efficiency():
    D, _ = gen_synthetic(2000, 3, 20, 1.0, 3.0, seed=0)
    t0 = time.perf_counter()
    fast, s_fast = fast_hca(D)
    t_fast = time.perf_counter() - t0
    t0 = time.perf_counter()
    naive, s_naive = naive_hca_with_stats(D)
    t_naive = time.perf_counter() - t0
    ratio_evals = s_fast.linkage_evaluations / s_naive.linkage_evaluations
    ratio_time = t_fast / t_naive
    ok = ratio_evals <= 0.30 and ratio_time <= 0.50 and fast.pairs == naive.pairs
    report(6, "fast HCA efficiency at N=2000", ok,
           f"evaluations {ratio_evals:.2%} of naive (max 30%), "
           f"time {t_fast:.2f}s vs {t_naive:.2f}s = {ratio_time:.2%} (max 50%)")
    assert ok


def test_7_refinement_improves_cut(trend_bench):
    results, _ = trend_bench
    worse = []
    no_gain = []
    for seed, recs in results.items():
        worse += [(seed, r.k) for r in recs if r.e_mlr > r.e_hca]
        if not any(r.e_mlr < r.e_hca for r in recs):
            no_gain.append(seed)
    gains = [1 - r.e_mlr / r.e_hca for recs in results.values() for r in recs]
    ok = not worse and not no_gain
    report(7, "E(MLR) <= E(HCA) everywhere, strictly better somewhere per seed", ok,
           f"worse={worse}, seeds without gain={no_gain}, "
           f"median decrease {np.median(gains):.2%}, max {max(gains):.2%}")
    assert ok
