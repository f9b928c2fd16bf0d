from collections import Counter

import numpy as np
import pytest

from pairrank.baselines import BaselineConfig, epsilon_greedy_rank, greedy_rank, sgd_ranknet_update
from pairrank.ranker import PairwiseObservation, gradient


def test_greedy_is_descending_score():
    docs = np.array([[0.1], [0.9], [0.5]])
    assert greedy_rank([1.0], docs).tolist() == [1, 2, 0]
    assert epsilon_greedy_rank([1.0], docs, 0.0, np.random.default_rng(0)).tolist() == [1, 2, 0]


def test_epsilon_one_is_uniform():
    docs = np.array([[3.0], [2.0], [1.0]])
    rng = np.random.default_rng(1)
    n = 30_000
    seen = Counter(tuple(epsilon_greedy_rank([1.0], docs, 1.0, rng)) for _ in range(n))
    assert len(seen) == 6
    assert all(abs(c / n - 1 / 6) < 0.01 for c in seen.values())


def test_epsilon_half_two_docs():
    docs = np.array([[0.0], [1.0]])
    rng = np.random.default_rng(2)
    n = 100_000
    best_first = sum(int(epsilon_greedy_rank([1.0], docs, 0.5, rng)[0] == 1) for _ in range(n))
    # best at the top: exploit (1/2) or explore and pick it (1/4)
    assert abs(best_first / n - 0.75) <= 0.01


def test_sgd_update_cases():
    theta = np.array([0.3, -0.2])
    assert sgd_ranknet_update(theta, [], 0.1, 0.0).tolist() == theta.tolist()
    out = sgd_ranknet_update(np.zeros(3), [PairwiseObservation(np.array([1.0, 0, 0]), 1)], 1.0, 0.0)
    assert out.tolist() == [0.5, 0.0, 0.0]


def test_sgd_step_is_negative_ranker_gradient():
    rng = np.random.default_rng(3)
    pairs = [PairwiseObservation(rng.normal(size=4), int(rng.integers(2))) for _ in range(7)]
    theta = rng.normal(size=4)
    step = sgd_ranknet_update(theta, pairs, 0.01, 0.3) - theta
    assert np.allclose(step, -0.01 * gradient(theta, pairs, 0.3), atol=1e-15)


@pytest.mark.parametrize("kw", [dict(kind="dbgd"), dict(epsilon=1.5), dict(learning_rate=0.0), dict(l2=-1.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        BaselineConfig(**kw)
