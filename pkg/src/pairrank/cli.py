"""Command line: run, validate, replay, selfcheck.

Exit codes: 0 success, 1 selfcheck failure, 2 bad config or input data,
3 aborted run.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config
from .data import DataFormatError
from .harness import load_data, replay_checkpoint, run_experiment
from .mathcheck import run_selfcheck
from .partition import PartitionError

EXIT_OK = 0
EXIT_SELFCHECK = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairrank")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run every seed of an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--workers", type=int, default=1, help="parallel replicate processes")
    val = sub.add_parser("validate", help="check a config and its data without running")
    val.add_argument("--config", required=True)
    rep = sub.add_parser("replay", help="resume a replicate from its checkpoint")
    rep.add_argument("--checkpoint", required=True)
    chk = sub.add_parser("selfcheck", help="compare core routines with brute-force oracles")
    chk.add_argument("--seed", type=int, default=0)
    return p


def _run(args) -> int:
    config = load_config(args.config)
    result = run_experiment(config, workers=max(1, args.workers))
    print(json.dumps(result.aggregate, indent=1))
    return EXIT_OK


def _validate(args) -> int:
    config = load_config(args.config)
    data = load_data(config)
    print(
        f"ok: policy={config.policy} click_model={config.click_model.name} rounds={config.rounds} "
        f"seeds={len(config.seeds)} dim={data.train.dim} train_queries={len(data.train)}"
    )
    return EXIT_OK


def _replay(args) -> int:
    s = replay_checkpoint(args.checkpoint)
    print(json.dumps(s.to_json(), indent=1))
    return EXIT_OK


def _selfcheck(args) -> int:
    reports = run_selfcheck(args.seed)
    for r in reports:
        print(r)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_SELFCHECK


COMMANDS = {"run": _run, "validate": _validate, "replay": _replay, "selfcheck": _selfcheck}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DataFormatError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PartitionError as e:
        print(f"run aborted: {e}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
