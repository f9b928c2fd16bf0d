"""The online interaction loop, replicates, checkpoints and experiment runs."""
from __future__ import annotations

import json
import logging
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import BaselineConfig, epsilon_greedy_rank, greedy_rank, sgd_ranknet_update
from .config import ConfigError, ExperimentConfig
from .data import (
    Dataset,
    DataFormatError,
    QueryInstance,
    SyntheticSpec,
    generate_synthetic,
    normalize_features,
    parse_letor,
)
from .evaluation import (
    KahanSum,
    RoundMetrics,
    RunSummary,
    block_diagnostics,
    cosine_similarity,
    kendall_regret,
    mean_std,
    ndcg_at_k,
)
from .interaction import ClickModelConfig, SessionOutcome, extract_independent_pairs, simulate_session
from .partition import Partition, ShuffleMode, partition_documents, render_ranked_list
from .ranker import (
    PairClass,
    PairHistory,
    PairwiseObservation,
    RankerConfig,
    RankerState,
    absorb_pairs,
    alpha,
    classify_pairs,
    fit,
    sigmoid,
)

log = logging.getLogger(__name__)

STREAMS = ("queries", "shuffle", "clicks")


def named_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator per (seed, consumer name)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, zlib.crc32(name.encode())])))


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    return {name: named_stream(seed, name) for name in STREAMS}


# --------------------------------------------------------------------------
# policies


class PairRankPolicy:
    def __init__(self, config: RankerConfig, mode: ShuffleMode, refit_every: int = 1):
        self.config = config
        self.mode = mode
        self.refit_every = refit_every
        self.state = RankerState.initial(config)
        self.history = PairHistory(config.dim)

    @property
    def theta(self) -> np.ndarray:
        return self.state.theta

    def rank(self, docs, rng) -> tuple[np.ndarray, Partition]:
        partition = partition_documents(self.state, self.config, docs)
        return render_ranked_list(partition, self.mode, rng), partition

    def learn(self, pairs: list[PairwiseObservation], t: int) -> None:
        # refit on history through this round, then grow the design matrix
        self.history.extend(pairs)
        if t % self.refit_every == 0:
            fit(self.state, self.history, self.config)
        absorb_pairs(self.state, pairs)

    def snapshot(self) -> dict:
        return {
            "state": self.state.to_dict(),
            "history_diffs": self.history.diffs.tolist(),
            "history_labels": self.history.labels.tolist(),
        }

    def restore(self, snap: dict) -> None:
        self.state = RankerState.from_dict(snap["state"])
        if snap["history_labels"]:
            self.history = PairHistory.from_arrays(snap["history_diffs"], snap["history_labels"])


class SgdRankNetPolicy:
    def __init__(self, dim: int, config: BaselineConfig):
        self.config = config
        self.theta = np.zeros(dim)

    def rank(self, docs, rng):
        return greedy_rank(self.theta, docs), None

    def learn(self, pairs, t: int) -> None:
        self.theta = sgd_ranknet_update(self.theta, pairs, self.config.learning_rate, self.config.l2)

    def snapshot(self) -> dict:
        return {"theta": self.theta.tolist()}

    def restore(self, snap: dict) -> None:
        self.theta = np.array(snap["theta"], dtype=float)


class EpsilonGreedyPolicy(SgdRankNetPolicy):
    def rank(self, docs, rng):
        return epsilon_greedy_rank(self.theta, docs, self.config.epsilon, rng), None


def make_policy(config: ExperimentConfig, dim: int):
    if config.policy == "PairRankR":
        return PairRankPolicy(config.ranker_config(dim), ShuffleMode.RANDOM, config.refit_every)
    if config.policy == "PairRankC":
        return PairRankPolicy(config.ranker_config(dim), ShuffleMode.CONSERVATIVE, config.refit_every)
    if config.policy == "EpsilonGreedy":
        return EpsilonGreedyPolicy(dim, config.baseline)
    return SgdRankNetPolicy(dim, config.baseline)


# --------------------------------------------------------------------------
# one round


@dataclass
class InteractionRecord:
    ranking: np.ndarray
    outcome: SessionOutcome
    pairs: list[PairwiseObservation]
    partition: Optional[Partition]
    kendall_regret: int
    ndcg10: float


def run_round(policy, query: QueryInstance, click_model: ClickModelConfig, rngs, t: int = 1):
    """Rank with the previous round's model, observe clicks, then update."""
    ranking, partition = policy.rank(query.docs, rngs["shuffle"])
    outcome = simulate_session(ranking, query.grades, click_model, rngs["clicks"])
    pairs = extract_independent_pairs(ranking, outcome, query.docs)
    record = InteractionRecord(
        ranking,
        outcome,
        pairs,
        partition,
        kendall_regret(ranking, query.grades),
        ndcg_at_k(ranking, query.grades, 10),
    )
    policy.learn(pairs, t)
    return policy, record


def offline_ndcg(theta, dataset: Dataset, k: int = 10) -> float:
    if not dataset.queries:
        return 0.0
    return float(np.mean([ndcg_at_k(greedy_rank(theta, q.docs), q.grades, k) for q in dataset.queries]))


# --------------------------------------------------------------------------
# data


@dataclass
class ExperimentData:
    train: Dataset
    test: Optional[Dataset]
    reference: Optional[np.ndarray]


def _pad(ds: Dataset, dim: int) -> Dataset:
    if ds.dim == dim:
        return ds
    qs = [replace(q, docs=np.pad(q.docs, ((0, 0), (0, dim - ds.dim)))) for q in ds.queries]
    return Dataset(qs, dim, ds.split)


def load_data(config: ExperimentConfig) -> ExperimentData:
    dc = config.dataset
    u = config.feature_bound
    if dc.synthetic is not None:
        try:
            world = SyntheticSpec(feature_bound=u, **dc.synthetic)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid synthetic settings: {e}") from None
        train, theta_star = generate_synthetic(world, named_stream(world.seed, "synthetic-train"))
        bound = config.ranker_config(world.dim).param_bound
        if config.policy.startswith("PairRank") and np.linalg.norm(theta_star) > bound * (1 + 1e-12):
            raise ConfigError(f"synthetic theta_star norm {np.linalg.norm(theta_star):.4g} exceeds param_bound {bound}")
        test_world = replace(world, n_queries=dc.test_queries, theta_star=theta_star)
        test, _ = generate_synthetic(test_world, named_stream(world.seed, "synthetic-test"), split="test")
        return ExperimentData(train, test, theta_star)
    try:
        train = parse_letor(dc.train, "train")
        test = parse_letor(dc.test, "test") if dc.test else None
    except (OSError, DataFormatError) as e:
        raise ConfigError(f"cannot load dataset: {e}") from None
    if not train.queries:
        raise ConfigError("training split is empty")
    for ds in (train, test):
        for q in ds.queries if ds else ():
            if q.grades.min() < 0 or q.grades.max() > 4:
                raise ConfigError(f"{ds.split} query {q.query_id}: grades must lie in 0..4")
    dim = max(train.dim, test.dim if test else 0)
    train = _pad(train, dim)
    if test is not None:
        test = normalize_features(_pad(test, dim), u, reference=train)
    train = normalize_features(train, u)
    return ExperimentData(train, test, None)


# --------------------------------------------------------------------------
# replicates


class Replicate:
    """One seeded run of the online loop; strictly sequential."""

    def __init__(self, config: ExperimentConfig, seed: int, data: ExperimentData):
        self.config = config
        self.seed = seed
        self.data = data
        self.rngs = make_streams(seed)
        self.policy = make_policy(config, data.train.dim)
        self.t = 0
        self.records: list[RoundMetrics] = []
        self.cum_regret = 0
        self.cndcg = KahanSum()
        self.n_merged = 0

    def step(self) -> RoundMetrics:
        t = self.t + 1
        train = self.data.train
        query = train[int(self.rngs["queries"].integers(len(train)))]
        _, rec = run_round(self.policy, query, self.config.click_model, self.rngs, t)
        self.cum_regret += rec.kendall_regret
        self.cndcg.add(rec.ndcg10 * self.config.gamma ** (t - 1))
        m = RoundMetrics(
            round=t,
            kendall_regret=rec.kendall_regret,
            ndcg_at_10=rec.ndcg10,
            pairs_absorbed=len(rec.pairs),
            cndcg=self.cndcg.total,
            cum_regret=self.cum_regret,
        )
        if rec.partition is not None:
            m.n_blocks, m.block_size_at_rank, m.n_uncertain_pairs = block_diagnostics(rec.partition)
            self.n_merged += rec.partition.n_merged
        if self.data.test is not None and t % self.config.eval_every == 0:
            m.test_ndcg10 = offline_ndcg(self.policy.theta, self.data.test)
        self.t = t
        self.records.append(m)
        return m

    def summary(self) -> RunSummary:
        evalset = self.data.test if self.data.test is not None else self.data.train
        ref = self.data.reference
        return RunSummary(
            seed=self.seed,
            cumulative_regret=self.cum_regret,
            cndcg=self.cndcg.total,
            final_ndcg=offline_ndcg(self.policy.theta, evalset),
            cosine_to_reference=None if ref is None else cosine_similarity(self.policy.theta, ref),
            diagnostics=self.diagnostics(),
            rounds=list(self.records),
        )

    def diagnostics(self) -> dict:
        state = getattr(self.policy, "state", None)
        if state is None:
            return {}
        return {
            "projections": state.n_projections,
            "fit_failures": state.n_fit_failures,
            "merged_components": self.n_merged,
        }

    def snapshot(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "n_merged": self.n_merged,
            "seed": self.seed,
            "round": self.t,
            "policy": self.policy.snapshot(),
            "rng": {k: g.bit_generator.state for k, g in self.rngs.items()},
            "records": [r.to_json() for r in self.records],
            "cum_regret": self.cum_regret,
            "cndcg": [self.cndcg.total, self.cndcg.comp],
        }

    @classmethod
    def from_snapshot(cls, snap: dict, config: ExperimentConfig, data: ExperimentData) -> "Replicate":
        rep = cls(config, int(snap["seed"]), data)
        rep.t = int(snap["round"])
        rep.policy.restore(snap["policy"])
        for k, g in rep.rngs.items():
            g.bit_generator.state = snap["rng"][k]
        rep.records = [RoundMetrics.from_json(r) for r in snap["records"]]
        rep.cum_regret = int(snap["cum_regret"])
        rep.cndcg = KahanSum(*snap["cndcg"])
        rep.n_merged = int(snap.get("n_merged", 0))
        return rep


def _dump_line(d: dict) -> str:
    return json.dumps(d, separators=(",", ":"))


def _write_json_atomic(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=1))
    os.replace(tmp, path)


def checkpoint_path(config: ExperimentConfig, seed: int) -> Path:
    return Path(config.output_dir) / f"{config.run_stem(seed)}.ckpt.json"


def run_replicate(
    config: ExperimentConfig,
    seed: int,
    data: Optional[ExperimentData] = None,
    resume: Optional[dict] = None,
    write: bool = True,
    stop_after: Optional[int] = None,
) -> RunSummary:
    """Run (or resume) one replicate and stream its rounds to JSONL.

    ``stop_after`` halts early after that many total rounds, which is how
    tests simulate an interrupted run.
    """
    data = data or load_data(config)
    rep = Replicate.from_snapshot(resume, config, data) if resume else Replicate(config, seed, data)
    out_dir = Path(config.output_dir)
    fh = None
    if write:
        out_dir.mkdir(parents=True, exist_ok=True)
        fh = open(out_dir / f"{config.run_stem(seed)}.jsonl", "w", encoding="utf-8")
        for r in rep.records:
            fh.write(_dump_line(r.to_json()) + "\n")
    last = config.rounds if stop_after is None else min(stop_after, config.rounds)
    try:
        while rep.t < last:
            m = rep.step()
            if fh:
                fh.write(_dump_line(m.to_json()) + "\n")
            if write and config.checkpoint_every and rep.t % config.checkpoint_every == 0:
                fh.flush()
                _write_json_atomic(checkpoint_path(config, seed), rep.snapshot())
    finally:
        if fh:
            fh.close()
    return rep.summary()


def _run_seed(config: ExperimentConfig, seed: int) -> RunSummary:
    return run_replicate(config, seed)


@dataclass
class ExperimentResult:
    summaries: list[RunSummary]
    aggregate: dict


def aggregate(summaries: list[RunSummary]) -> dict:
    out = {
        "cndcg": mean_std([s.cndcg for s in summaries]),
        "cum_regret": mean_std([s.cumulative_regret for s in summaries]),
        "final_ndcg": mean_std([s.final_ndcg for s in summaries]),
    }
    cos = [s.cosine_to_reference for s in summaries if s.cosine_to_reference is not None]
    if cos:
        out["cosine_to_reference"] = mean_std(cos)
    return out


def write_summary(config: ExperimentConfig, summaries: list[RunSummary]) -> dict:
    path = Path(config.output_dir) / "summary.json"
    entries = {}
    if path.exists():
        try:
            old = json.loads(path.read_text())
            if old.get("policy") == config.policy and old.get("click_model") == config.click_model.name:
                entries = {int(e["seed"]): e for e in old.get("replicates", [])}
        except (OSError, ValueError):
            entries = {}
    for s in summaries:
        entries[s.seed] = s.to_json()
    reps = [entries[k] for k in sorted(entries)]
    doc = {
        "policy": config.policy,
        "click_model": config.click_model.name,
        "rounds": config.rounds,
        "gamma": config.gamma,
        "replicates": reps,
        "aggregate": {
            k: mean_std([r[k] for r in reps if r[k] is not None])
            for k in ("cndcg", "cum_regret", "final_ndcg", "cosine_to_reference")
            if any(r[k] is not None for r in reps)
        },
    }
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    _write_json_atomic(path, doc)
    return doc


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """All seeds of one configuration; replicates share nothing mutable."""
    data = load_data(config)  # fail fast on bad datasets before any round
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            summaries = list(ex.map(_run_seed, [config] * len(config.seeds), config.seeds))
    else:
        summaries = [run_replicate(config, s, data) for s in config.seeds]
    write_summary(config, summaries)
    return ExperimentResult(summaries, aggregate(summaries))


def replay_checkpoint(path) -> RunSummary:
    """Resume a replicate from its checkpoint and finish it."""
    try:
        snap = json.loads(Path(path).read_text())
        config = ExperimentConfig.from_dict(snap["config"])
    except (OSError, ValueError, KeyError) as e:
        raise ConfigError(f"unreadable checkpoint: {e}") from None
    summary = run_replicate(config, int(snap["seed"]), resume=snap)
    write_summary(config, [summary])
    return summary


# --------------------------------------------------------------------------
# synthetic check with model-consistent pair labels


@dataclass
class LabelNoiseCounts:
    n_classified: int = 0
    n_violations: int = 0
    n_certain: int = 0
    n_certain_wrong: int = 0

    @property
    def violation_rate(self) -> float:
        return self.n_violations / self.n_classified if self.n_classified else 0.0

    @property
    def certain_error_rate(self) -> float:
        return self.n_certain_wrong / self.n_certain if self.n_certain else 0.0


def run_label_noise_trial(
    config: RankerConfig,
    dataset: Dataset,
    theta_star: np.ndarray,
    rounds: int,
    seed: int,
    mode: ShuffleMode = ShuffleMode.RANDOM,
) -> LabelNoiseCounts:
    """PairRank loop where each disjoint adjacent pair gets a label drawn
    from ``Bernoulli(sigmoid(x_ij @ theta_star))`` instead of clicks.

    Before each round's update, every candidate pair is scored against the
    true preference: width violations and wrong certain orders are counted.
    """
    rngs = make_streams(seed)
    state = RankerState.initial(config)
    history = PairHistory(config.dim)
    counts = LabelNoiseCounts()
    for t in range(1, rounds + 1):
        q = dataset[int(rngs["queries"].integers(len(dataset)))]
        X = q.docs
        n = len(X)
        iu, ju = np.triu_indices(n, 1)
        scores = X @ state.theta
        diffs = X[iu] - X[ju]
        cls, p_hat, cb = classify_pairs(state, scores[iu], scores[ju], diffs, alpha(state, config))
        true_margin = diffs @ theta_star
        counts.n_classified += len(iu)
        counts.n_violations += int(np.count_nonzero(np.abs(p_hat - sigmoid(true_margin)) > cb))
        first = cls == PairClass.CERTAIN_FIRST
        second = cls == PairClass.CERTAIN_SECOND
        counts.n_certain += int(first.sum() + second.sum())
        counts.n_certain_wrong += int(np.count_nonzero(first & (true_margin <= 0)))
        counts.n_certain_wrong += int(np.count_nonzero(second & (true_margin >= 0)))

        ranking = render_ranked_list(partition_documents(state, config, X), mode, rngs["shuffle"])
        pairs = []
        for p in range(0, n - 1, 2):
            diff = X[ranking[p]] - X[ranking[p + 1]]
            y = int(rngs["clicks"].random() < sigmoid(float(diff @ theta_star)))
            pairs.append(PairwiseObservation(diff, y))
        history.extend(pairs)
        fit(state, history, config)
        absorb_pairs(state, pairs)
    return counts
