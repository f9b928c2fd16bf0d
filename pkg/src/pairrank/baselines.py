"""Reference online rankers: epsilon-greedy and plain SGD RankNet."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ranker import PairwiseObservation, sigmoid


@dataclass(frozen=True)
class BaselineConfig:
    kind: str = "sgd_ranknet"  # or "epsilon_greedy"
    epsilon: float = 0.1
    learning_rate: float = 0.1
    l2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("epsilon_greedy", "sgd_ranknet"):
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")


def greedy_rank(theta, docs) -> np.ndarray:
    scores = np.asarray(docs, dtype=float) @ np.asarray(theta, dtype=float)
    # stable sort keeps index order among equal scores
    return np.argsort(-scores, kind="stable")


def epsilon_greedy_rank(theta, docs, epsilon: float, rng) -> np.ndarray:
    """Fill positions top-down: random unranked doc w.p. epsilon, else the best one."""
    remaining = list(greedy_rank(theta, docs))
    out = []
    while remaining:
        if rng.random() < epsilon:
            k = int(rng.integers(len(remaining)))
        else:
            k = 0
        out.append(remaining.pop(k))
    return np.array(out, dtype=int)


def sgd_ranknet_update(theta, pairs: list[PairwiseObservation], lr: float, l2: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if not pairs:
        return theta - lr * l2 * theta
    X = np.array([p.diff for p in pairs], dtype=float)
    y = np.array([p.label for p in pairs], dtype=float)
    grad = X.T @ (sigmoid(X @ theta) - y) + l2 * theta
    return theta - lr * grad
