"""Run several configs over their seeds and tabulate cNDCG, regret and offline NDCG.

    python scripts/compare_policies.py configs/synthetic_informational_random.yaml \
        configs/synthetic_informational_conservative.yaml configs/baseline_sgd.yaml --workers 2
"""
import argparse

from pairrank.config import load_config
from pairrank.harness import run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("configs", nargs="+")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--rounds", type=int, default=None, help="override the round count")
    args = ap.parse_args()

    rows = []
    for path in args.configs:
        cfg = load_config(path)
        if args.rounds:
            cfg.rounds = args.rounds
        agg = run_experiment(cfg, workers=args.workers).aggregate
        rows.append((cfg.policy, cfg.click_model.name, len(cfg.seeds), agg))

    print(f"{'policy':<14} {'clicks':<14} {'seeds':>5} {'cNDCG':>18} {'cum regret':>20} {'final NDCG@10':>16}")
    for policy, cm, n, agg in rows:
        def fmt(key, digits):
            return f"{agg[key]['mean']:.{digits}f} +- {agg[key]['std']:.{digits}f}"

        print(f"{policy:<14} {cm:<14} {n:>5} {fmt('cndcg', 2):>18} {fmt('cum_regret', 1):>20} {fmt('final_ndcg', 3):>16}")


if __name__ == "__main__":
    main()
