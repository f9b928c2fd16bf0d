"""LETOR / SVMlight datasets and synthetic queries with a known scorer."""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np


class DataFormatError(ValueError):
    pass


@dataclass
class QueryInstance:
    query_id: str
    docs: np.ndarray  # (n_docs, dim)
    grades: np.ndarray  # int, (n_docs,)

    @property
    def n_docs(self) -> int:
        return len(self.grades)


@dataclass
class Dataset:
    queries: list[QueryInstance]
    dim: int
    split: str = "train"

    def __len__(self):
        return len(self.queries)

    def __getitem__(self, i) -> QueryInstance:
        return self.queries[i]


def parse_letor(source, split: str = "train") -> Dataset:
    """Parse ``<grade> qid:<id> <idx>:<val> ... # comment`` lines.

    ``source`` is a path, a text/bytes stream or raw bytes.  Indices are
    1-based and sparse; the dimension is the largest index in the file.
    Rows are grouped by qid in order of first appearance.
    """
    if isinstance(source, (bytes, bytearray)):
        stream = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, (str, os.PathLike)):
        stream = open(source, "r", encoding="utf-8")
    else:
        stream = source
    rows: dict[str, list[tuple[int, dict[int, float]]]] = {}
    max_idx = 0
    try:
        for lineno, raw in enumerate(stream, start=1):
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8")
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                grade = int(tokens[0])
            except ValueError:
                raise DataFormatError(f"line {lineno}: non-integer grade {tokens[0]!r}") from None
            if len(tokens) < 2 or not tokens[1].startswith("qid:") or len(tokens[1]) == 4:
                raise DataFormatError(f"line {lineno}: missing qid field")
            qid = tokens[1][4:]
            feats: dict[int, float] = {}
            for tok in tokens[2:]:
                idx, sep, val = tok.partition(":")
                try:
                    k = int(idx)
                    v = float(val)
                except ValueError:
                    raise DataFormatError(f"line {lineno}: bad feature {tok!r}") from None
                if not sep or k < 1:
                    raise DataFormatError(f"line {lineno}: bad feature {tok!r}")
                feats[k] = v
                max_idx = max(max_idx, k)
            rows.setdefault(qid, []).append((grade, feats))
    finally:
        if stream is not source:
            stream.close()

    queries = []
    for qid, docs in rows.items():
        X = np.zeros((len(docs), max_idx))
        for r, (_, feats) in enumerate(docs):
            for k, v in feats.items():
                X[r, k - 1] = v
        grades = np.array([g for g, _ in docs], dtype=int)
        queries.append(QueryInstance(qid, X, grades))
    return Dataset(queries, max_idx, split)


def write_letor(dataset: Dataset, stream) -> None:
    """Inverse of :func:`parse_letor`; writes every feature densely."""
    for q in dataset.queries:
        for x, g in zip(q.docs, q.grades):
            feats = " ".join(f"{k + 1}:{float(v)!r}" for k, v in enumerate(x))
            stream.write(f"{int(g)} qid:{q.query_id} {feats}\n")


@dataclass
class Normalizer:
    """Min-max scaling fitted on a reference split, followed by a norm cap."""

    lo: np.ndarray
    span: np.ndarray
    scale: float
    bound: float

    def transform(self, X: np.ndarray) -> np.ndarray:
        Z = np.where(self.span > 0, (X - self.lo) / np.where(self.span > 0, self.span, 1.0), 0.0)
        Z = np.clip(Z, 0.0, 1.0) * self.scale
        norms = np.linalg.norm(Z, axis=1)
        over = norms > self.bound
        if over.any():
            # only reachable for rows outside the reference split
            Z[over] *= (self.bound / norms[over])[:, None]
        return Z


def fit_normalizer(reference: Dataset, u: float) -> Normalizer:
    if not reference.queries:
        return Normalizer(np.zeros(reference.dim), np.zeros(reference.dim), u, u)
    X = np.vstack([q.docs for q in reference.queries])
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = hi - lo
    Z = np.where(span > 0, (X - lo) / np.where(span > 0, span, 1.0), 0.0)
    max_norm = float(np.linalg.norm(Z, axis=1).max())
    return Normalizer(lo, span, u / max(1.0, max_norm), u)


def normalize_features(dataset: Dataset, u: float, reference: Optional[Dataset] = None) -> Dataset:
    """Scale features so every vector has norm at most ``u``.

    Statistics come from ``reference`` (the train split) when given, else
    from ``dataset`` itself.
    """
    norm = fit_normalizer(reference if reference is not None else dataset, u)
    queries = [replace(q, docs=norm.transform(q.docs)) for q in dataset.queries]
    return Dataset(queries, dataset.dim, dataset.split)


@dataclass
class SyntheticSpec:
    dim: int
    n_queries: int = 100
    docs_per_query: int = 10
    theta_star: Optional[np.ndarray] = None
    theta_norm: float = 1.0
    grade_levels: int = 5
    feature_bound: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.docs_per_query < 2:
            raise ValueError("docs_per_query must be >= 2")
        if self.theta_star is not None:
            self.theta_star = np.asarray(self.theta_star, dtype=float)
            if self.theta_star.shape != (self.dim,):
                raise ValueError("theta_star has the wrong shape")


def quantile_grades(scores: np.ndarray, levels: int) -> np.ndarray:
    """Equal-count grade bins by ascending score, ties broken by index."""
    n = len(scores)
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(n, dtype=int)
    ranks[order] = np.arange(n)
    return (ranks * levels) // n


def generate_synthetic(world: SyntheticSpec, rng, split: str = "train") -> tuple[Dataset, np.ndarray]:
    """Queries with docs on spheres of radius ``u * U(0.5, 1)``.

    Grades are per-query quantiles of ``x @ theta_star``.  The returned
    ``theta_star`` is meant for oracle checks only.
    """
    d = world.dim
    theta_star = world.theta_star
    if theta_star is None:
        v = rng.standard_normal(d)
        theta_star = world.theta_norm * v / np.linalg.norm(v)
    queries = []
    for k in range(world.n_queries):
        G = rng.standard_normal((world.docs_per_query, d))
        radius = world.feature_bound * rng.uniform(0.5, 1.0, size=world.docs_per_query)
        X = G / np.linalg.norm(G, axis=1, keepdims=True) * radius[:, None]
        grades = quantile_grades(X @ theta_star, world.grade_levels)
        queries.append(QueryInstance(f"{split}{k}", X, grades))
    return Dataset(queries, d, split), theta_star
