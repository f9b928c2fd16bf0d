"""Ranking metrics and per-round diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .partition import Partition

TRACKED_RANKS = (1, 5, 10)


def kendall_regret(ranking, grades) -> int:
    """Number of untied document pairs shown in the wrong order.

    ``ranking`` lists document indices by position.
    """
    g = np.asarray(grades)[np.asarray(ranking, dtype=int)]
    if len(g) != len(grades):
        raise ValueError("ranking and grades differ in length")
    wrong = g[:, None] < g[None, :]
    return int(np.count_nonzero(np.triu(wrong, 1)))


def dcg_at_k(gains_in_order, k: int) -> float:
    g = np.asarray(gains_in_order, dtype=float)[:k]
    return float(np.sum((2.0**g - 1.0) / np.log2(np.arange(2, len(g) + 2))))


def ndcg_at_k(ranking, grades, k: int = 10) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    grades = np.asarray(grades)
    ideal = dcg_at_k(np.sort(grades)[::-1], k)
    if ideal == 0.0:
        return 0.0
    return dcg_at_k(grades[np.asarray(ranking, dtype=int)], k) / ideal


class KahanSum:
    def __init__(self, total: float = 0.0, comp: float = 0.0):
        self.total = total
        self.comp = comp

    def add(self, x: float) -> float:
        y = x - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t
        return t


def cumulative_ndcg(series: Sequence[float], gamma: float = 0.9995) -> float:
    """Discounted online reward ``sum_t ndcg_t * gamma**(t-1)``."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    acc = KahanSum()
    for t, v in enumerate(series):
        acc.add(v * gamma**t)
    return acc.total


def cosine_similarity(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def block_diagnostics(partition: Partition, ranks=TRACKED_RANKS) -> tuple[int, dict[int, int], int]:
    """Block count, size of the block covering each tracked rank, and |E_u|.

    Blocks occupy contiguous positions in the rendered list, so the block at
    rank ``p`` follows from the cumulative block sizes alone.
    """
    sizes = partition.sizes
    ends = np.cumsum(sizes)
    at_rank = {}
    for p in ranks:
        if p <= ends[-1]:
            at_rank[p] = sizes[int(np.searchsorted(ends, p))]
    return len(sizes), at_rank, partition.graph.n_uncertain


@dataclass
class RoundMetrics:
    round: int
    kendall_regret: int
    ndcg_at_10: float
    n_blocks: Optional[int] = None
    block_size_at_rank: dict = field(default_factory=dict)
    n_uncertain_pairs: Optional[int] = None
    pairs_absorbed: int = 0
    cndcg: float = 0.0
    cum_regret: int = 0
    test_ndcg10: Optional[float] = None

    def to_json(self) -> dict:
        out = {
            "round": self.round,
            "kendall_regret": self.kendall_regret,
            "ndcg10": self.ndcg_at_10,
            "n_blocks": self.n_blocks,
        }
        for p in TRACKED_RANKS:
            out[f"block_size_r{p}"] = self.block_size_at_rank.get(p)
        out.update(
            n_uncertain=self.n_uncertain_pairs,
            cndcg=self.cndcg,
            cum_regret=self.cum_regret,
            pairs=self.pairs_absorbed,
        )
        if self.test_ndcg10 is not None:
            out["test_ndcg10"] = self.test_ndcg10
        return out

    @classmethod
    def from_json(cls, d: dict) -> "RoundMetrics":
        sizes = {p: d[f"block_size_r{p}"] for p in TRACKED_RANKS if d.get(f"block_size_r{p}") is not None}
        return cls(
            round=d["round"],
            kendall_regret=d["kendall_regret"],
            ndcg_at_10=d["ndcg10"],
            n_blocks=d["n_blocks"],
            block_size_at_rank=sizes,
            n_uncertain_pairs=d["n_uncertain"],
            pairs_absorbed=d.get("pairs", 0),
            cndcg=d["cndcg"],
            cum_regret=d["cum_regret"],
            test_ndcg10=d.get("test_ndcg10"),
        )


@dataclass
class RunSummary:
    seed: int
    cumulative_regret: int
    cndcg: float
    final_ndcg: float
    cosine_to_reference: Optional[float]
    rounds: list[RoundMetrics] = field(default_factory=list, repr=False)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "cum_regret": self.cumulative_regret,
            "cndcg": self.cndcg,
            "final_ndcg": self.final_ndcg,
            "cosine_to_reference": self.cosine_to_reference,
            "rounds": len(self.rounds),
            "diagnostics": dict(self.diagnostics),
        }


def mean_std(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {"mean": float(v.mean()), "std": float(v.std(ddof=1)) if len(v) > 1 else 0.0}
