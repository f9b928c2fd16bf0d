import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import FIVE_DOCS, FIVE_GRADES, five_doc_model
from pairrank import mathcheck
from pairrank.evaluation import (
    KahanSum,
    RoundMetrics,
    block_diagnostics,
    cosine_similarity,
    cumulative_ndcg,
    dcg_at_k,
    kendall_regret,
    mean_std,
    ndcg_at_k,
)
from pairrank.partition import PairGraph, Partition, partition_documents


def test_kendall_five_doc_lists():
    # documents 0..4 with grades 4..0; lists written 1-based in the comments
    first = np.array([2, 1, 4, 5, 3]) - 1
    second = np.array([2, 1, 3, 5, 4]) - 1
    assert kendall_regret(first, FIVE_GRADES) == 3
    assert kendall_regret(second, FIVE_GRADES) == 2


def test_kendall_basic():
    assert kendall_regret([0, 1, 2, 3], [3, 2, 1, 0]) == 0
    assert kendall_regret([3, 2, 1, 0], [3, 2, 1, 0]) == 6
    assert kendall_regret([1, 0], [2, 2]) == 0  # ties never count
    with pytest.raises(ValueError):
        kendall_regret([0, 1], [1, 2, 3])


@given(st.lists(st.integers(0, 4), min_size=1, max_size=12), st.randoms(use_true_random=False))
def test_kendall_matches_inversion_oracle(grades, rnd):
    ranking = list(range(len(grades)))
    rnd.shuffle(ranking)
    assert kendall_regret(ranking, grades) == mathcheck.merge_sort_inversions(ranking, grades)


def test_ndcg_cases():
    assert ndcg_at_k([0, 1, 2], [4, 2, 0]) == 1.0
    assert ndcg_at_k([2, 0, 1], [0, 0, 0]) == 0.0
    dcg = 1 + 3 / math.log2(3)
    idcg = 3 + 1 / math.log2(3)
    assert ndcg_at_k([0, 1], [1, 2], k=2) == pytest.approx(dcg / idcg, abs=1e-15)
    assert dcg / idcg == pytest.approx(0.7967, abs=1e-4)
    with pytest.raises(ValueError):
        ndcg_at_k([0], [1], k=0)


def test_ndcg_truncates_at_k():
    grades = np.array([0, 0, 0, 4])
    assert ndcg_at_k([0, 1, 2, 3], grades, k=3) == 0.0
    assert dcg_at_k([4, 3], 1) == 15.0


@given(st.lists(st.integers(0, 4), min_size=1, max_size=15), st.integers(1, 12), st.randoms(use_true_random=False))
def test_ndcg_bounds(grades, k, rnd):
    ranking = list(range(len(grades)))
    rnd.shuffle(ranking)
    v = ndcg_at_k(ranking, grades, k)
    assert 0.0 <= v <= 1.0 + 1e-12


def test_cumulative_ndcg_goldens():
    assert cumulative_ndcg([1.0]) == 1.0
    assert cumulative_ndcg([1.0, 1.0], 0.9995) == pytest.approx(1.9995, abs=1e-15)
    assert cumulative_ndcg([]) == 0.0
    with pytest.raises(ValueError):
        cumulative_ndcg([1.0], 0.0)


@pytest.mark.parametrize("c,T", [(1.0, 5000), (0.37, 1000), (0.8, 20000)])
def test_cumulative_ndcg_geometric_sum(c, T):
    g = 0.9995
    want = c * (1 - g**T) / (1 - g)
    got = cumulative_ndcg([c] * T, g)
    assert got == pytest.approx(want, abs=1e-10)
    assert got < c / (1 - g)


def test_kahan_beats_naive_sum():
    vals = [1e8] + [1e-8] * 100_000
    k = KahanSum()
    for v in vals:
        k.add(v)
    assert k.total == pytest.approx(1e8 + 1e-3, abs=1e-9)


def test_cosine():
    assert cosine_similarity([1, 2], [1, 2]) == pytest.approx(1.0)
    assert cosine_similarity([1, 0], [0, 3]) == 0.0
    assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert cosine_similarity([0, 0], [1, 1]) == 0.0


def test_block_diagnostics():
    scores = np.arange(5, 0, -1.0)
    singles = Partition([[0], [1], [2], [3], [4]], PairGraph.from_edges(5, scores, []))
    assert block_diagnostics(singles, ranks=(1, 3, 5)) == (5, {1: 1, 3: 1, 5: 1}, 0)
    state, cfg = five_doc_model()
    part = partition_documents(state, cfg, FIVE_DOCS)
    n, sizes, unc = block_diagnostics(part, ranks=(1, 2, 3, 5, 10))
    assert n == 2 and sizes == {1: 2, 2: 2, 3: 3, 5: 3} and unc == 3
    whole = Partition([[0, 1, 2, 3, 4]], PairGraph.from_edges(5, scores, [(0, 1), (1, 2), (2, 3), (3, 4)]))
    assert block_diagnostics(whole, ranks=(1, 3, 5))[1] == {1: 5, 3: 5, 5: 5}


def test_round_metrics_json_roundtrip():
    m = RoundMetrics(3, 4, 0.5, 2, {1: 2, 5: 3}, 7, 2, 1.25, 9, test_ndcg10=0.6)
    d = m.to_json()
    assert list(d)[:4] == ["round", "kendall_regret", "ndcg10", "n_blocks"]
    assert d["block_size_r10"] is None
    assert RoundMetrics.from_json(d) == m


def test_mean_std():
    assert mean_std([2.0]) == {"mean": 2.0, "std": 0.0}
    r = mean_std([1.0, 2.0, 3.0])
    assert r["mean"] == 2.0 and r["std"] == pytest.approx(1.0)
