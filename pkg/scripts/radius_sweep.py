"""Sweep the cold-start radius and report coverage, certainty and learning speed.

Two settings are probed for each value of ``alpha_initial``:
  * Bernoulli pair labels drawn from the true scorer (d=5, L=10): how often
    the width fails to cover the true preference and how often a certain
    order is wrong;
  * perfect clicks (d=10, L=20): regret decay and rank-1 block size.

    python scripts/radius_sweep.py --values 0.03 0.1 0.3 1 3 --seeds 3
"""
import argparse

import numpy as np

from pairrank.config import ExperimentConfig
from pairrank.data import SyntheticSpec, generate_synthetic
from pairrank.harness import load_data, named_stream, run_label_noise_trial, run_replicate
from pairrank.ranker import RankerConfig, RankerState, alpha


def label_noise(a0, seeds, rounds):
    world = SyntheticSpec(dim=5, n_queries=200, docs_per_query=10, theta_norm=4.0, seed=0)
    ds, theta = generate_synthetic(world, named_stream(0, "synthetic-train"))
    cfg = RankerConfig(dim=5, param_bound=4.0, noise_param=0.5, alpha_initial=a0)
    counts = [run_label_noise_trial(cfg, ds, theta, rounds, s) for s in range(1, seeds + 1)]
    viol = sum(c.n_violations for c in counts) / sum(c.n_classified for c in counts)
    certain = sum(c.n_certain for c in counts)
    wrong = sum(c.n_certain_wrong for c in counts) / max(certain, 1)
    return viol, certain / sum(c.n_classified for c in counts), wrong


def clicks(a0, seeds, rounds):
    cfg = ExperimentConfig.from_dict(
        dict(
            policy="PairRankR",
            rounds=rounds,
            seeds=list(range(1, seeds + 1)),
            click_model="perfect",
            dataset=dict(synthetic=dict(dim=10, n_queries=200, docs_per_query=20, theta_norm=4.0, seed=0)),
            ranker=dict(param_bound=4.0, alpha_initial=a0),
        ),
        env_override=False,
    )
    data = load_data(cfg)
    runs = [run_replicate(cfg, s, data, write=False) for s in cfg.seeds]
    reg = np.array([[r.kendall_regret for r in run.rounds] for run in runs])
    b1 = np.array([[r.block_size_at_rank[1] for r in run.rounds] for run in runs])
    tail = rounds // 10
    return reg[:, -tail:].mean() / max(reg[:, :tail].mean(), 1e-12), float(np.mean(np.median(b1, axis=0)[rounds // 2 :] == 1))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--values", type=float, nargs="+", default=[0.03, 0.1, 0.3, 1.0, 3.0])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--rounds", type=int, default=1000)
    args = ap.parse_args()

    derived = RankerConfig(dim=10, param_bound=4.0)
    print(f"derived cold-start radius for d=10, Q=4: {alpha(RankerState.initial(derived), derived):.1f}")
    print(f"{'alpha0':>7} {'violations':>10} {'certain':>8} {'wrong':>7} {'regret late/early':>18} {'median r1 == 1':>15}")
    for a0 in args.values:
        v, c, w = label_noise(a0, args.seeds, args.rounds)
        ratio, conv = clicks(a0, args.seeds, args.rounds)
        print(f"{a0:>7g} {v:>10.4f} {c:>8.3f} {w:>7.4f} {ratio:>18.3f} {conv:>15.3f}")


if __name__ == "__main__":
    main()
