import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissmlr.core import Partition, validate_matrix
from dissmlr.errors import InvariantViolation, KOutOfRange, TooFewObjects
from dissmlr.hca import Dendrogram, cut, cut_labels, fast_hca, naive_hca, naive_hca_with_stats
from oracles import exact_hca, random_matrix


def assert_same(d1, d2, rtol=1e-12):
    assert d1.pairs == d2.pairs
    np.testing.assert_allclose(d1.deltas, d2.deltas, rtol=rtol, atol=0)


class TestNaive:
    def test_D3(self, D3):
        d = naive_hca(D3)
        assert [(s.left, s.right, s.delta_e) for s in d.steps] == [(0, 1, 1.0), (2, 3, 3.0)]

    def test_D4(self, D4):
        d = naive_hca(D4)
        assert [(s.left, s.right, s.delta_e) for s in d.steps] == [(0, 1, 1), (2, 3, 1), (4, 5, 50)]
        assert [s.new_size for s in d.steps] == [2, 2, 4]
        assert [s.error_after for s in d.steps] == [1, 2, 52]

    def test_two_objects(self):
        d = naive_hca(validate_matrix([[0, 2.5], [2.5, 0]]))
        assert d.pairs == [(0, 1)] and d.deltas.tolist() == [2.5]

    def test_too_few(self):
        with pytest.raises(TooFewObjects):
            naive_hca(validate_matrix([[0]]))
        with pytest.raises(TooFewObjects):
            fast_hca(validate_matrix([[0]]))

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_exact_rational_oracle(self, seed):
        values = random_matrix(7, seed)
        d = naive_hca(validate_matrix(values))
        want = exact_hca(values)
        assert d.pairs == [(a, b) for a, b, _ in want]
        np.testing.assert_allclose(d.deltas, [float(x) for _, _, x in want], rtol=1e-12)


class TestFast:
    def test_D3(self, D3):
        assert_same(fast_hca(D3)[0], naive_hca(D3))

    def test_D4(self, D4):
        assert_same(fast_hca(D4, checked=True)[0], naive_hca(D4))

    def test_all_ties(self):
        n = 9
        values = np.ones((n, n)) - np.eye(n)
        D = validate_matrix(values)
        fast, _ = fast_hca(D, checked=True)
        assert_same(fast, naive_hca(D), rtol=0)
        want = exact_hca(values)
        assert fast.pairs == [(a, b) for a, b, _ in want]

    def test_integer_ties(self):
        rng = np.random.default_rng(3)
        a = rng.integers(1, 4, (30, 30)).astype(float)
        a = np.triu(a, 1)
        D = validate_matrix(a + a.T)
        assert_same(fast_hca(D, checked=True)[0], naive_hca(D), rtol=0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(5, 60), st.integers(0, 2**32 - 1))
    def test_random_equivalence(self, n, seed):
        D = validate_matrix(random_matrix(n, seed))
        fast, _ = fast_hca(D, checked=True)
        assert_same(fast, naive_hca(D))

    def test_fewer_linkage_evaluations(self):
        D = validate_matrix(random_matrix(200, 11))
        naive, s_naive = naive_hca_with_stats(D)
        fast, s_fast = fast_hca(D)
        assert_same(fast, naive)
        assert s_naive.linkage_evaluations == sum(m * (m - 1) // 2 for m in range(2, 201))
        assert s_fast.linkage_evaluations <= 0.5 * s_naive.linkage_evaluations

    def test_checked_mode_catches_bad_commit(self, monkeypatch):
        import dissmlr.hca as hca

        D = validate_matrix(random_matrix(12, 5))
        real = hca._ClusterSet.global_minimum

        def skewed(self):
            best, lo, hi, m = real(self)
            return best - 1.0, lo, hi, m

        monkeypatch.setattr(hca._ClusterSet, "global_minimum", skewed)
        with pytest.raises(InvariantViolation):
            fast_hca(D, checked=True)

    def test_deterministic(self):
        D = validate_matrix(random_matrix(40, 2))
        a, b = fast_hca(D)[0], fast_hca(D)[0]
        assert a.steps == b.steps


class TestDendrogram:
    def test_error_after_telescopes(self):
        D = validate_matrix(random_matrix(50, 8))
        d, _ = fast_hca(D)
        total = Partition.from_labels(D, np.zeros(50, dtype=int)).error()
        assert d.steps[-1].error_after == pytest.approx(total, rel=1e-9)
        np.testing.assert_allclose(np.cumsum(d.deltas), d.errors(), rtol=1e-9)

    def test_ids_merged_once(self):
        d, _ = fast_hca(validate_matrix(random_matrix(30, 4)))
        ids = [c for s in d.steps for c in (s.left, s.right)]
        assert len(ids) == len(set(ids)) == 2 * 30 - 2

    def test_rejects_reused_id(self):
        from dissmlr.hca import MergeStep
        from dissmlr.errors import BadPartition

        with pytest.raises(BadPartition):
            Dendrogram(3, [MergeStep(0, 0, 1, 1.0, 1.0, 2), MergeStep(1, 0, 2, 1.0, 2.0, 2)])


class TestCut:
    def test_levels(self):
        D = validate_matrix(random_matrix(25, 6))
        d, _ = fast_hca(D)
        for k in range(1, 26):
            P = cut(d, k, D)
            assert P.n_clusters == k
            P.verify(D)

    def test_singletons_and_one(self, D4):
        d = naive_hca(D4)
        P = cut(d, 4, D4)
        assert P.clusters() == [[0], [1], [2], [3]] and P.error() == 0
        assert cut(d, 1, D4).clusters() == [[0, 1, 2, 3]]

    def test_D4_two(self, D4):
        P = cut(naive_hca(D4), 2, D4)
        assert P.clusters() == [[0, 1], [2, 3]]
        assert P.error() == 2

    def test_labels_by_smallest_member(self):
        D = validate_matrix(random_matrix(30, 9))
        labels = cut_labels(fast_hca(D)[0], 6)
        firsts = [int(np.flatnonzero(labels == c)[0]) for c in range(6)]
        assert firsts == sorted(firsts)

    def test_k_out_of_range(self, D4):
        d = naive_hca(D4)
        with pytest.raises(KOutOfRange):
            cut(d, 0, D4)
        with pytest.raises(KOutOfRange):
            cut(d, 5, D4)
