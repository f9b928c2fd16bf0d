"""Dependent click model simulation and click-pair extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ranker import PairwiseObservation

DEFAULT_BINS = (0, 0, 1, 1, 2)


@dataclass(frozen=True)
class ClickModelConfig:
    """Per-bin click and post-click stop probabilities (bins 0, 1, 2)."""

    name: str
    click_prob: tuple[float, float, float]
    stop_prob: tuple[float, float, float]
    bins: tuple[int, ...] = DEFAULT_BINS

    def __post_init__(self):
        if len(self.click_prob) != 3 or len(self.stop_prob) != 3:
            raise ValueError("click_prob and stop_prob need 3 entries each")
        for p in (*self.click_prob, *self.stop_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        if len(self.bins) != 5 or any(b not in (0, 1, 2) for b in self.bins):
            raise ValueError("bins must map grades 0..4 onto 0..2")

    @classmethod
    def from_dict(cls, d: dict) -> "ClickModelConfig":
        return cls(
            name=str(d.get("name", "custom")),
            click_prob=tuple(float(v) for v in d["click_prob"]),
            stop_prob=tuple(float(v) for v in d["stop_prob"]),
            bins=tuple(int(v) for v in d.get("bins", DEFAULT_BINS)),
        )


PERFECT = ClickModelConfig("perfect", (0.0, 0.5, 1.0), (0.0, 0.0, 0.0))
NAVIGATIONAL = ClickModelConfig("navigational", (0.05, 0.5, 0.95), (0.2, 0.5, 0.9))
INFORMATIONAL = ClickModelConfig("informational", (0.4, 0.7, 0.9), (0.1, 0.3, 0.5))

CLICK_MODELS = {m.name: m for m in (PERFECT, NAVIGATIONAL, INFORMATIONAL)}


def get_click_model(name: str) -> ClickModelConfig:
    try:
        return CLICK_MODELS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown click model {name!r}; choose from {sorted(CLICK_MODELS)}") from None


def bin_grade(grade: int, bins=DEFAULT_BINS) -> int:
    if int(grade) != grade or not 0 <= grade <= 4:
        raise ValueError(f"grade must be an integer in 0..4, got {grade!r}")
    return bins[int(grade)]


@dataclass
class SessionOutcome:
    """Clicks by position (0-based array), plus examination depths.

    ``last_examined`` is the 1-based depth the learner treats as examined;
    ``n_examined`` is how far the simulated user actually read.
    """

    clicks: np.ndarray
    last_examined: int
    n_examined: int


def simulate_session(ranking, grades, model: ClickModelConfig, rng) -> SessionOutcome:
    """Top-down scan: click by grade bin, and after a click stop by grade bin."""
    ranking = np.asarray(ranking, dtype=int)
    n = len(ranking)
    draws = rng.random((2, n))
    clicks = np.zeros(n, dtype=np.int8)
    n_examined = n
    for p in range(n):
        b = bin_grade(int(grades[ranking[p]]), model.bins)
        if draws[0, p] < model.click_prob[b]:
            clicks[p] = 1
            if draws[1, p] < model.stop_prob[b]:
                n_examined = p + 1
                break
    clicked = np.flatnonzero(clicks)
    if len(clicked):
        last_examined = min(int(clicked[-1]) + 2, n)
    else:
        last_examined = n_examined
    return SessionOutcome(clicks, last_examined, n_examined)


def independent_pair_positions(clicks, last_examined: int) -> list[tuple[int, int]]:
    """Greedy top-down disjoint adjacent pairs with differing clicks (0-based)."""
    out = []
    p = 0
    while p + 1 < last_examined:
        if clicks[p] != clicks[p + 1]:
            out.append((p, p + 1))
            p += 2
        else:
            p += 1
    return out


def extract_independent_pairs(ranking, outcome: SessionOutcome, docs) -> list[PairwiseObservation]:
    """Training pairs oriented as (higher position - lower position)."""
    docs = np.asarray(docs, dtype=float)
    ranking = np.asarray(ranking, dtype=int)
    pairs = []
    for p, q in independent_pair_positions(outcome.clicks, outcome.last_examined):
        diff = docs[ranking[p]] - docs[ranking[q]]
        pairs.append(PairwiseObservation(diff, int(outcome.clicks[p])))
    return pairs
