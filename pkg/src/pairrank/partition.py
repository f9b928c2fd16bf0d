"""Divide-and-conquer list construction from certain/uncertain pair orders."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ranker import PairClass, RankerConfig, RankerState, alpha, classify_pairs


class PartitionError(RuntimeError):
    """Cross-block order contradicts a certain edge."""


class ShuffleMode(enum.Enum):
    RANDOM = "random"
    CONSERVATIVE = "conservative"


@dataclass
class PairGraph:
    """Certain and uncertain pair orders over one query's candidates.

    ``order[i, j] == 1`` means ``i`` is certainly preferred to ``j`` (and then
    ``order[j, i] == -1``); zero entries off the diagonal are uncertain.
    """

    n_docs: int
    scores: np.ndarray
    order: np.ndarray

    @property
    def certain_edges(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in zip(*np.nonzero(self.order == 1))}

    @property
    def uncertain_edges(self) -> set[tuple[int, int]]:
        iu, ju = np.triu_indices(self.n_docs, 1)
        mask = self.order[iu, ju] == 0
        return {(int(i), int(j)) for i, j in zip(iu[mask], ju[mask])}

    @property
    def n_uncertain(self) -> int:
        iu, ju = np.triu_indices(self.n_docs, 1)
        return int(np.count_nonzero(self.order[iu, ju] == 0))

    @classmethod
    def from_edges(cls, n_docs: int, scores, uncertain) -> "PairGraph":
        """Graph where every pair not in ``uncertain`` is certain by score."""
        scores = np.asarray(scores, dtype=float)
        order = np.sign(scores[:, None] - scores[None, :]).astype(np.int8)
        for i, j in uncertain:
            order[i, j] = order[j, i] = 0
        return cls(n_docs, scores, order)


@dataclass
class Partition:
    blocks: list[list[int]]
    graph: PairGraph
    n_merged: int = 0  # components absorbed by coalesce_components

    @property
    def sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]


def build_pair_graph(state: RankerState, config: RankerConfig, docs) -> PairGraph:
    X = np.asarray(docs, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("need a non-empty (n_docs, dim) document matrix")
    if X.shape[1] != config.dim:
        raise ValueError(f"document dim {X.shape[1]} != model dim {config.dim}")
    n = len(X)
    scores = X @ state.theta
    order = np.zeros((n, n), dtype=np.int8)
    if n > 1:
        a = alpha(state, config)
        iu, ju = np.triu_indices(n, 1)
        cls, _, _ = classify_pairs(state, scores[iu], scores[ju], X[iu] - X[ju], a)
        order[iu, ju] = cls
        order[ju, iu] = -cls
    return PairGraph(n, scores, order)


class DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def connected_components(graph: PairGraph) -> list[list[int]]:
    """Components of the uncertain-edge graph, each sorted, ordered by first member."""
    ds = DisjointSet(graph.n_docs)
    iu, ju = np.triu_indices(graph.n_docs, 1)
    mask = graph.order[iu, ju] == 0
    for i, j in zip(iu[mask].tolist(), ju[mask].tolist()):
        ds.union(i, j)
    groups: dict[int, list[int]] = {}
    for v in range(graph.n_docs):
        groups.setdefault(ds.find(v), []).append(v)
    return sorted(groups.values(), key=lambda c: c[0])


def coalesce_components(components: list[list[int]], graph: PairGraph) -> tuple[list[list[int]], int]:
    """Merge components until each one spans a contiguous run of the score order.

    Certainty is not transitive: with saturated preferences, ``a > b`` and
    ``b > c`` can both be certain while the wider pair ``(a, c)`` is not.  The
    component ``{a, c}`` then straddles ``b`` and no block order is valid.
    Cutting the score-sorted list only where no component crosses the cut
    gives the finest valid partition; it equals ``components`` whenever
    those already admit a valid order.  Returns the blocks and the number of
    components that were merged away.
    """
    ranked = sorted(range(graph.n_docs), key=lambda v: (-graph.scores[v], v))
    comp_of = {v: k for k, comp in enumerate(components) for v in comp}
    last = {}
    for pos, v in enumerate(ranked):
        last[comp_of[v]] = pos
    blocks, start, reach = [], 0, -1
    for pos, v in enumerate(ranked):
        reach = max(reach, last[comp_of[v]])
        if pos == reach:
            blocks.append(sorted(ranked[start : pos + 1]))
            start = pos + 1
    return sorted(blocks, key=lambda b: b[0]), len(components) - len(blocks)


def order_blocks(components: list[list[int]], graph: PairGraph) -> Partition:
    """Sort blocks by their best member's score and check the result.

    Every certain edge agrees with the score order, so this matches a
    topological sort of the block graph.  Any cross-block pair that is not a
    certain win for the earlier block raises ``PartitionError``.
    """
    blocks = sorted(components, key=lambda b: -max(graph.scores[i] for i in b))
    block_of = np.empty(graph.n_docs, dtype=int)
    for k, b in enumerate(blocks):
        block_of[b] = k
    earlier = block_of[:, None] < block_of[None, :]
    bad = earlier & (graph.order != PairClass.CERTAIN_FIRST)
    if bad.any():
        i, j = (int(v) for v in np.argwhere(bad)[0])
        raise PartitionError(
            f"documents {i} (block {block_of[i]}) and {j} (block {block_of[j]}) "
            f"are not in a certain order"
        )
    return Partition(blocks, graph)


def _random_linear_extension(block: list[int], order: np.ndarray, rng) -> list[int]:
    # randomized Kahn: uniform pick among currently unconstrained members
    sub = order[np.ix_(block, block)]
    indeg = (sub == -1).sum(axis=1)
    remaining = list(range(len(block)))
    out = []
    while remaining:
        avail = [k for k in remaining if indeg[k] == 0]
        k = avail[int(rng.integers(len(avail)))]
        remaining.remove(k)
        out.append(block[k])
        indeg -= sub[k] == 1
    return out


def render_ranked_list(partition: Partition, mode: ShuffleMode, rng) -> np.ndarray:
    """Concatenate per-block orderings; returns document indices by position.

    Singleton blocks draw nothing from ``rng``.
    """
    ranking: list[int] = []
    for block in partition.blocks:
        if len(block) == 1:
            ranking.extend(block)
        elif mode is ShuffleMode.RANDOM:
            ranking.extend(int(v) for v in rng.permutation(block))
        else:
            ranking.extend(_random_linear_extension(block, partition.graph.order, rng))
    return np.array(ranking, dtype=int)


def partition_documents(state: RankerState, config: RankerConfig, docs) -> Partition:
    graph = build_pair_graph(state, config, docs)
    blocks, merged = coalesce_components(connected_components(graph), graph)
    part = order_blocks(blocks, graph)
    part.n_merged = merged
    return part
