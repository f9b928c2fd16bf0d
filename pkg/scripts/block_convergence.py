"""Trace block sizes, block counts and regret over rounds for a synthetic config.

    python scripts/block_convergence.py --config configs/synthetic_blocks.yaml --seeds 5
"""
import argparse
import dataclasses

import numpy as np

from pairrank.config import load_config
from pairrank.harness import load_data, run_replicate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/synthetic_blocks.yaml")
    ap.add_argument("--seeds", type=int, default=None, help="use only the first N seeds")
    ap.add_argument("--every", type=int, default=100)
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.seeds:
        cfg = dataclasses.replace(cfg, seeds=cfg.seeds[: args.seeds])
    data = load_data(cfg)
    runs = [run_replicate(cfg, s, data, write=False) for s in cfg.seeds]

    def grid(key):
        return np.array([[key(r) for r in run.rounds] for run in runs], dtype=float)

    sizes = {p: grid(lambda r, p=p: r.block_size_at_rank.get(p, np.nan)) for p in (1, 5, 10)}
    blocks = grid(lambda r: r.n_blocks)
    regret = grid(lambda r: r.kendall_regret)
    print(f"{cfg.policy} / {cfg.click_model.name}, {len(runs)} seeds")
    print(f"{'rounds':>11} {'median r1':>9} {'mean r1':>8} {'mean r5':>8} {'mean r10':>8} {'blocks':>7} {'regret':>7}")
    for lo in range(0, cfg.rounds, args.every):
        hi = min(lo + args.every, cfg.rounds)
        sl = slice(lo, hi)
        print(
            f"{lo + 1:>5}-{hi:<5} {np.median(sizes[1][:, sl]):>9.1f} {np.nanmean(sizes[1][:, sl]):>8.2f} "
            f"{np.nanmean(sizes[5][:, sl]):>8.2f} {np.nanmean(sizes[10][:, sl]):>8.2f} "
            f"{blocks[:, sl].mean():>7.2f} {regret[:, sl].mean():>7.2f}"
        )
    cos = [r.cosine_to_reference for r in runs if r.cosine_to_reference is not None]
    if cos:
        print(f"cosine(theta_hat, theta_star): mean {np.mean(cos):.4f}, min {np.min(cos):.4f}")


if __name__ == "__main__":
    main()
