"""Online single-layer RankNet with confidence-bounded pairwise preferences.

The model scores a document as ``x @ theta`` and predicts
``P(i > j) = sigmoid(x_i @ theta - x_j @ theta)``.  Parameters are refit on
the full click-pair history each round; the design matrix ``M`` tracks the
observed pair differences and drives the confidence width of every pairwise
prediction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

K_MU = 0.25
SIGMOID_CLAMP = 500.0
LOG_CLAMP = 1e-12
REFRESH_EVERY = 500


def sigmoid(z):
    """Logistic function, stable for large ``|z|``.

    Accepts a scalar or an array; scalars come back as ``float``.
    """
    arr = np.clip(np.asarray(z, dtype=float), -SIGMOID_CLAMP, SIGMOID_CLAMP)
    e = np.exp(-np.abs(arr))
    out = np.where(arr >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    if out.ndim == 0:
        return float(out)
    return out


def sigmoid_prime(z):
    s = sigmoid(z)
    return s * (1.0 - s)


@dataclass(frozen=True)
class RankerConfig:
    """Hyper-parameters of the pairwise ranker.

    ``alpha_scale`` multiplies the theoretical confidence radius; 1.0 keeps
    the radius exactly as derived from the bounds below.  ``alpha_initial``
    is a friendlier way to set the same multiplier: the radius is rescaled so
    that it equals ``alpha_initial`` at cold start (``M = lam * I``) and then
    grows with ``log det M`` as usual.
    """

    dim: int
    lam: float = 1.0
    delta1: float = 0.1
    param_bound: float = 1.0
    feature_bound: float = 1.0
    noise_param: float = math.sqrt(2.0) / 2.0
    fit_tolerance: float = 1e-6
    fit_max_iters: int = 1000
    fit_method: str = "newton"
    alpha_scale: float = 1.0
    alpha_initial: Optional[float] = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not 0 < self.delta1 < 0.5:
            raise ValueError("delta1 must lie in (0, 1/2)")
        for name in ("param_bound", "feature_bound", "noise_param", "fit_tolerance", "alpha_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.fit_max_iters < 1:
            raise ValueError("fit_max_iters must be >= 1")
        if self.fit_method not in ("gd", "newton"):
            raise ValueError(f"unknown fit_method {self.fit_method!r}")
        if self.alpha_initial is not None and not self.alpha_initial > 0:
            raise ValueError("alpha_initial must be positive")

    @property
    def k_mu(self) -> float:
        return K_MU

    @property
    def c_mu(self) -> float:
        # sigma' is even and decreasing in |z|; |x_ij @ theta| <= 2uQ
        return float(sigmoid_prime(2.0 * self.feature_bound * self.param_bound))

    def theoretical_alpha(self, log_det: float) -> float:
        inner = self.noise_param**2 * (log_det - self.dim * math.log(self.lam) - 2.0 * math.log(self.delta1))
        radius = math.sqrt(max(inner, 0.0)) + math.sqrt(self.lam) * self.param_bound
        return (2.0 * self.k_mu / self.c_mu) * radius

    @property
    def radius_multiplier(self) -> float:
        if self.alpha_initial is None:
            return self.alpha_scale
        cold = self.theoretical_alpha(self.dim * math.log(self.lam))
        return self.alpha_scale * self.alpha_initial / cold


@dataclass
class PairwiseObservation:
    diff: np.ndarray
    label: int


class PairClass(enum.IntEnum):
    CERTAIN_SECOND = -1
    UNCERTAIN = 0
    CERTAIN_FIRST = 1


class PairHistory:
    """Append-only store of pair differences and labels.

    Backed by amortised-growth arrays so the per-round refit can work on a
    contiguous ``(n, d)`` block.
    """

    def __init__(self, dim: int, capacity: int = 256):
        self.dim = dim
        self._diffs = np.empty((capacity, dim))
        self._labels = np.empty(capacity)
        self._n = 0

    def __len__(self):
        return self._n

    def extend(self, pairs: Iterable[PairwiseObservation]) -> None:
        for p in pairs:
            if self._n == len(self._labels):
                self._diffs = np.concatenate([self._diffs, np.empty_like(self._diffs)])
                self._labels = np.concatenate([self._labels, np.empty_like(self._labels)])
            self._diffs[self._n] = p.diff
            self._labels[self._n] = p.label
            self._n += 1

    @property
    def diffs(self) -> np.ndarray:
        return self._diffs[: self._n]

    @property
    def labels(self) -> np.ndarray:
        return self._labels[: self._n]

    def observations(self) -> list[PairwiseObservation]:
        return [PairwiseObservation(d.copy(), int(y)) for d, y in zip(self.diffs, self.labels)]

    @classmethod
    def from_arrays(cls, diffs, labels) -> "PairHistory":
        diffs = np.asarray(diffs, dtype=float)
        h = cls(diffs.shape[1], capacity=max(256, len(diffs)))
        h._diffs[: len(diffs)] = diffs
        h._labels[: len(diffs)] = labels
        h._n = len(diffs)
        return h


def _as_arrays(history, dim: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(history, PairHistory):
        return history.diffs, history.labels
    if len(history) == 0:
        return np.empty((0, dim)), np.empty(0)
    X = np.array([np.asarray(p.diff, dtype=float) for p in history])
    y = np.array([p.label for p in history], dtype=float)
    if X.shape[1] != dim:
        raise ValueError(f"observation dim {X.shape[1]} != parameter dim {dim}")
    return X, y


@dataclass
class RankerState:
    theta: np.ndarray
    design: np.ndarray
    design_inv: np.ndarray
    log_det: float
    n_pairs: int = 0
    # diagnostics, not part of the model
    updates_since_refresh: int = 0
    n_projections: int = 0
    n_fit_failures: int = 0
    last_fit_converged: bool = True
    last_fit_iters: int = 0

    @classmethod
    def initial(cls, config: RankerConfig) -> "RankerState":
        d, lam = config.dim, config.lam
        return cls(
            theta=np.zeros(d),
            design=lam * np.eye(d),
            design_inv=np.eye(d) / lam,
            log_det=d * math.log(lam),
        )

    @property
    def dim(self) -> int:
        return len(self.theta)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "design": self.design.tolist(),
            "design_inv": self.design_inv.tolist(),
            "log_det": self.log_det,
            "n_pairs": self.n_pairs,
            "updates_since_refresh": self.updates_since_refresh,
            "n_projections": self.n_projections,
            "n_fit_failures": self.n_fit_failures,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RankerState":
        return cls(
            theta=np.array(d["theta"], dtype=float),
            design=np.array(d["design"], dtype=float),
            design_inv=np.array(d["design_inv"], dtype=float),
            log_det=float(d["log_det"]),
            n_pairs=int(d["n_pairs"]),
            updates_since_refresh=int(d.get("updates_since_refresh", 0)),
            n_projections=int(d.get("n_projections", 0)),
            n_fit_failures=int(d.get("n_fit_failures", 0)),
        )


def _check_dim(state: RankerState, *vectors) -> None:
    for v in vectors:
        if np.shape(v)[-1] != state.dim:
            raise ValueError(f"vector dim {np.shape(v)[-1]} != model dim {state.dim}")


def pairwise_prob(state: RankerState, x_i, x_j) -> float:
    x_i, x_j = np.asarray(x_i, dtype=float), np.asarray(x_j, dtype=float)
    _check_dim(state, x_i, x_j)
    s = np.vstack([x_i, x_j]) @ state.theta
    return sigmoid(s[0] - s[1])


def _loss_xy(theta, X, y, lam):
    reg = 0.5 * lam * float(theta @ theta)
    if len(y) == 0:
        return reg
    p = np.clip(sigmoid(X @ theta), LOG_CLAMP, 1.0 - LOG_CLAMP)
    return float(-np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p))) + reg


def _grad_xy(theta, X, y, lam):
    g = lam * theta
    if len(y):
        g = g + X.T @ (sigmoid(X @ theta) - y)
    return g


def loss(theta, history, lam: float) -> float:
    """Regularised cross-entropy of the pair history at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    X, y = _as_arrays(history, len(theta))
    return _loss_xy(theta, X, y, lam)


def gradient(theta, history, lam: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    X, y = _as_arrays(history, len(theta))
    return _grad_xy(theta, X, y, lam)


def _minimize(theta, X, y, lam, tol, max_iters, method):
    """Backtracking (Armijo) descent; returns (theta, converged, iters)."""
    beta, c = 0.5, 1e-4
    f = _loss_xy(theta, X, y, lam)
    step0 = 1.0
    for it in range(max_iters):
        g = _grad_xy(theta, X, y, lam)
        if float(np.linalg.norm(g)) <= tol:
            return theta, True, it
        if method == "newton":
            w = sigmoid_prime(X @ theta)
            H = (X * w[:, None]).T @ X + lam * np.eye(len(theta))
            direction = np.linalg.solve(H, g)
            t = 1.0
        else:
            direction = g
            t = step0
        slope = float(g @ direction)
        while True:
            cand = theta - t * direction
            f_new = _loss_xy(cand, X, y, lam)
            if f_new <= f - c * t * slope or t < 1e-20:
                break
            t *= beta
        if f_new > f:
            # no representable descent step left
            return theta, False, it + 1
        theta, f = cand, f_new
        step0 = 2.0 * t
    g = _grad_xy(theta, X, y, lam)
    return theta, bool(np.linalg.norm(g) <= tol), max_iters


def fit(state: RankerState, history, config: RankerConfig) -> np.ndarray:
    """Refit ``state.theta`` on the whole history, warm-started.

    Iterates until the gradient norm drops to ``config.fit_tolerance``; if
    the iteration budget runs out the best iterate is kept and
    ``state.last_fit_converged`` is cleared.  Estimates outside the
    ``param_bound`` ball are rescaled onto its boundary.
    """
    X, y = _as_arrays(history, config.dim)
    theta0 = np.array(state.theta, dtype=float)
    theta, ok, iters = _minimize(
        theta0, X, y, config.lam, config.fit_tolerance, config.fit_max_iters, config.fit_method
    )
    norm = float(np.linalg.norm(theta))
    if norm > config.param_bound:
        theta = theta * (config.param_bound / norm)
        state.n_projections += 1
    state.theta = theta
    state.last_fit_converged = ok
    state.last_fit_iters = iters
    if not ok:
        state.n_fit_failures += 1
    return theta


def alpha(state: RankerState, config: RankerConfig) -> float:
    """Confidence radius for the current design matrix."""
    return config.radius_multiplier * config.theoretical_alpha(state.log_det)


def confidence_width(state: RankerState, diff, alpha: float) -> float:
    diff = np.asarray(diff, dtype=float)
    q = float(diff @ state.design_inv @ diff)
    return alpha * math.sqrt(max(q, 0.0))


def classify_pairs(state: RankerState, scores_i, scores_j, diffs, alpha: float):
    """Vectorised certainty test.

    ``scores_*`` are the model scores of each side, ``diffs`` the
    ``x_i - x_j`` rows.  Returns an int array of ``PairClass`` values plus
    the estimated preferences and widths.
    """
    z = np.asarray(scores_i, dtype=float) - np.asarray(scores_j, dtype=float)
    diffs = np.atleast_2d(diffs)
    q = np.einsum("pd,de,pe->p", diffs, state.design_inv, diffs)
    cb = alpha * np.sqrt(np.maximum(q, 0.0))
    p_first = np.atleast_1d(sigmoid(z))
    p_second = np.atleast_1d(sigmoid(-z))
    out = np.zeros(len(z), dtype=np.int8)
    out[p_first - cb > 0.5] = PairClass.CERTAIN_FIRST
    out[p_second - cb > 0.5] = PairClass.CERTAIN_SECOND
    return out, p_first, cb


def classify_pair(state: RankerState, x_i, x_j, alpha: float) -> PairClass:
    x_i, x_j = np.asarray(x_i, dtype=float), np.asarray(x_j, dtype=float)
    _check_dim(state, x_i, x_j)
    s = np.vstack([x_i, x_j]) @ state.theta
    cls, _, _ = classify_pairs(state, s[:1], s[1:], (x_i - x_j)[None, :], alpha)
    return PairClass(int(cls[0]))


def absorb_pairs(state: RankerState, pairs: Sequence[PairwiseObservation]) -> RankerState:
    """Add ``sum diff diff^T`` to the design matrix.

    The inverse follows Sherman-Morrison per pair and the log-determinant the
    matrix-determinant lemma; both are recomputed from scratch every
    ``REFRESH_EVERY`` pairs to bound drift.  ``theta`` is left untouched.
    """
    for p in pairs:
        x = np.asarray(p.diff, dtype=float)
        mx = state.design_inv @ x
        denom = 1.0 + float(x @ mx)
        state.design_inv = state.design_inv - np.outer(mx, mx) / denom
        state.log_det += math.log(denom)
        state.design = state.design + np.outer(x, x)
        state.n_pairs += 1
        state.updates_since_refresh += 1
        if state.updates_since_refresh >= REFRESH_EVERY:
            refresh_inverse(state)
    return state


def refresh_inverse(state: RankerState) -> None:
    chol = np.linalg.cholesky(state.design)
    inv_chol = np.linalg.inv(chol)
    state.design_inv = inv_chol.T @ inv_chol
    state.log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    state.updates_since_refresh = 0
