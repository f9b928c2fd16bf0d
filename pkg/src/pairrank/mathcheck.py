"""Brute-force oracles, deliberately sharing no arithmetic with the code they check.

Everything here is slow and small-input only.  ``run_selfcheck`` pits each
oracle against the production path on seeded random inputs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class OracleReport:
    name: str
    max_abs_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= self.tolerance

    def __str__(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: max_abs_error={self.max_abs_error:.3e} tolerance={self.tolerance:.1e}"


def _logistic(v: float) -> float:
    if v >= 0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


def reference_loss(theta, diffs, labels, lam: float) -> float:
    """Plain-loop pairwise cross-entropy plus ridge term."""
    total = 0.0
    for x, y in zip(diffs, labels):
        z = sum(float(a) * float(b) for a, b in zip(x, theta))
        p = min(max(_logistic(z), 1e-12), 1.0 - 1e-12)
        total -= y * math.log(p) + (1 - y) * math.log(1.0 - p)
    return total + 0.5 * lam * sum(float(t) ** 2 for t in theta)


def fd_gradient(theta, diffs, labels, lam: float, step: float = 1e-5) -> np.ndarray:
    """Central differences of :func:`reference_loss`."""
    if not step > 0:
        raise ValueError("step must be positive")
    theta = np.asarray(theta, dtype=float)
    g = np.empty_like(theta)
    for k in range(len(theta)):
        hi, lo = theta.copy(), theta.copy()
        hi[k] += step
        lo[k] -= step
        g[k] = (reference_loss(hi, diffs, labels, lam) - reference_loss(lo, diffs, labels, lam)) / (2 * step)
    return g


def exact_matching(clicks) -> int:
    """Maximum number of disjoint adjacent position pairs with differing clicks.

    Exhaustive over all edge subsets; refuses inputs longer than 12.
    """
    n = len(clicks)
    if n > 12:
        raise ValueError("exact_matching is exponential; length must be <= 12")
    edges = [p for p in range(n - 1) if clicks[p] != clicks[p + 1]]
    for r in range(len(edges), 0, -1):
        for combo in itertools.combinations(edges, r):
            if all(b - a >= 2 for a, b in zip(combo, combo[1:])):
                return r
    return 0


def merge_sort_inversions(ranking, grades) -> int:
    """Mis-ordered untied pairs via merge-sort inversion counting.

    An inversion is a position pair (p < q) with grade[p] < grade[q]; equal
    grades never count, so ties are merged left-first.
    """
    seq = [int(grades[d]) for d in ranking]

    def sort_count(a):
        if len(a) <= 1:
            return a, 0
        mid = len(a) // 2
        left, nl = sort_count(a[:mid])
        right, nr = sort_count(a[mid:])
        merged, inv, i, j = [], nl + nr, 0, 0
        # sort descending; a right element strictly greater than left[i:] inverts them all
        while i < len(left) and j < len(right):
            if left[i] >= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                inv += len(left) - i
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, inv

    return sort_count(seq)[1]


def full_design(lam: float, diffs, dim: int):
    """Design matrix, its inverse and log-determinant recomputed from scratch."""
    M = lam * np.eye(dim)
    for x in diffs:
        M += np.outer(x, x)
    L = np.linalg.cholesky(M)
    Linv = np.linalg.solve(L, np.eye(dim))
    return M, Linv.T @ Linv, 2.0 * float(np.log(np.diag(L)).sum())


def mle_bisection_1d(xs, ys, lam: float, lo: float = -50.0, hi: float = 50.0, iters: int = 200) -> float:
    """Root of the scalar estimating equation ``sum (sigma(t x) - y) x + lam t``."""

    def f(t):
        return sum((_logistic(t * x) - y) * x for x, y in zip(xs, ys)) + lam * t

    if f(lo) > 0 or f(hi) < 0:
        raise ValueError("bracket does not contain the root")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def alpha_closed_form(log_det: float, dim: int, lam: float, delta1: float, noise: float, bound: float, feature_bound: float) -> float:
    """Confidence radius in 50-digit arithmetic."""
    import mpmath

    mpmath.mp.dps = 50
    s = 1 / (1 + mpmath.e ** (-2 * mpmath.mpf(feature_bound) * bound))
    c_mu = s * (1 - s)
    inner = noise**2 * (mpmath.mpf(log_det) - dim * mpmath.log(lam) - 2 * mpmath.log(delta1))
    val = (2 * mpmath.mpf(1) / 4 / c_mu) * (mpmath.sqrt(inner) + mpmath.sqrt(lam) * bound)
    return float(val)


def brute_linear_extensions(n: int, edges):
    """All orderings of range(n) consistent with (winner, loser) edges."""
    out = []
    for perm in itertools.permutations(range(n)):
        pos = {v: k for k, v in enumerate(perm)}
        if all(pos[a] < pos[b] for a, b in edges):
            out.append(perm)
    return out


# --------------------------------------------------------------------------


def _random_history(rng, dim, n):
    diffs = rng.uniform(-1, 1, size=(n, dim))
    labels = rng.integers(0, 2, size=n)
    return diffs, labels


def run_selfcheck(seed: int = 0) -> list[OracleReport]:
    from . import evaluation, interaction, ranker

    rng = np.random.default_rng(seed)
    reports = []

    err = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 8))
        diffs, labels = _random_history(rng, d, int(rng.integers(0, 30)))
        theta = rng.normal(size=d)
        lam = float(rng.uniform(0.1, 2))
        hist = ranker.PairHistory.from_arrays(diffs.reshape(-1, d), labels)
        g = ranker.gradient(theta, hist, lam)
        fd = fd_gradient(theta, diffs, labels, lam)
        err = max(err, float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)))
    reports.append(OracleReport("gradient vs central differences (relative)", err, 1e-6))

    err = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 6))
        diffs, labels = _random_history(rng, d, 15)
        theta = rng.normal(size=d)
        lam = float(rng.uniform(0.1, 2))
        hist = ranker.PairHistory.from_arrays(diffs, labels)
        err = max(err, abs(ranker.loss(theta, hist, lam) - reference_loss(theta, diffs, labels, lam)))
    reports.append(OracleReport("loss vs plain-loop loss", err, 1e-9))

    err = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        clicks = rng.integers(0, 2, size=n)
        got = len(interaction.independent_pair_positions(clicks, n))
        err = max(err, abs(got - exact_matching(clicks)))
    reports.append(OracleReport("greedy pair extraction vs exhaustive matching", err, 0.0))

    err = 0.0
    for _ in range(300):
        n = int(rng.integers(1, 9))
        grades = rng.integers(0, 5, size=n)
        ranking = rng.permutation(n)
        err = max(err, abs(evaluation.kendall_regret(ranking, grades) - merge_sort_inversions(ranking, grades)))
    reports.append(OracleReport("Kendall regret vs merge-sort inversions", err, 0.0))

    d, lam = 4, 0.5
    cfg = ranker.RankerConfig(dim=d, lam=lam)
    state = ranker.RankerState.initial(cfg)
    diffs = rng.normal(size=(600, d)) * 0.5
    ranker.absorb_pairs(state, [ranker.PairwiseObservation(x, 1) for x in diffs])
    M, Minv, logdet = full_design(lam, diffs, d)
    err = max(
        float(np.abs(state.design - M).max()),
        float(np.abs(state.design_inv - Minv).max()),
        abs(state.log_det - logdet),
    )
    reports.append(OracleReport("incremental design inverse/log-det vs Cholesky", err, 1e-8))

    xs = rng.uniform(-1, 1, size=60)
    ys = (rng.random(60) < 1 / (1 + np.exp(-1.5 * xs))).astype(int)
    cfg1 = ranker.RankerConfig(dim=1, lam=0.3, param_bound=100.0, fit_tolerance=1e-10)
    st1 = ranker.RankerState.initial(cfg1)
    obs = [ranker.PairwiseObservation(np.array([x]), int(y)) for x, y in zip(xs, ys)]
    ranker.fit(st1, obs, cfg1)
    err = abs(float(st1.theta[0]) - mle_bisection_1d(xs, ys, 0.3))
    reports.append(OracleReport("1-D fit vs bisection on estimating equation", err, 1e-8))

    cfg2 = ranker.RankerConfig(dim=3, lam=0.7, delta1=0.05, param_bound=1.3, feature_bound=0.9, noise_param=0.6)
    st2 = ranker.RankerState.initial(cfg2)
    ranker.absorb_pairs(st2, [ranker.PairwiseObservation(x, 0) for x in rng.normal(size=(40, 3))])
    want = alpha_closed_form(st2.log_det, 3, 0.7, 0.05, 0.6, 1.3, 0.9)
    reports.append(OracleReport("confidence radius vs 50-digit evaluation", abs(ranker.alpha(st2, cfg2) - want), 1e-9 * want))
    return reports
