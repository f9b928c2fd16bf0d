"""Experiment configuration: YAML file <-> dataclasses."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .baselines import BaselineConfig
from .interaction import ClickModelConfig, get_click_model
from .ranker import RankerConfig

POLICIES = {
    "pairrankr": "PairRankR",
    "pairrankc": "PairRankC",
    "epsilongreedy": "EpsilonGreedy",
    "sgdranknet": "SgdRankNet",
}
OUTPUT_DIR_ENV = "PAIRRANK_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class DataConfig:
    """Either LETOR files (``train`` and optionally ``test``) or a synthetic world."""

    train: Optional[str] = None
    test: Optional[str] = None
    validation: Optional[str] = None
    synthetic: Optional[dict] = None
    test_queries: int = 100

    def __post_init__(self):
        if (self.train is None) == (self.synthetic is None):
            raise ConfigError("dataset needs exactly one of 'train' or 'synthetic'")


@dataclass
class ExperimentConfig:
    policy: str
    dataset: DataConfig
    click_model: ClickModelConfig
    rounds: int = 5000
    seeds: list = field(default_factory=lambda: list(range(1, 21)))
    ranker: dict = field(default_factory=dict)
    baseline: Optional[BaselineConfig] = None
    gamma: float = 0.9995
    output_dir: str = "runs"
    checkpoint_every: Optional[int] = None
    refit_every: int = 1
    eval_every: int = 50

    def __post_init__(self):
        key = str(self.policy).replace("_", "").replace("-", "").lower()
        if key not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}; choose from {sorted(POLICIES.values())}")
        self.policy = POLICIES[key]
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise ConfigError("rounds must be a positive integer")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if any(int(s) != s or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative integers")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("gamma must lie in (0, 1]")
        for name in ("refit_every", "eval_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.checkpoint_every is not None and self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every must be >= 1")
        if self.policy in ("EpsilonGreedy", "SgdRankNet"):
            kind = "epsilon_greedy" if self.policy == "EpsilonGreedy" else "sgd_ranknet"
            if self.baseline is None:
                self.baseline = BaselineConfig(kind=kind)
            elif self.baseline.kind != kind:
                self.baseline = dataclasses.replace(self.baseline, kind=kind)
        try:
            self.ranker_config(1)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid ranker settings: {e}") from None

    @property
    def feature_bound(self) -> float:
        return float(self.ranker.get("feature_bound", 1.0))

    def ranker_config(self, dim: int) -> RankerConfig:
        return RankerConfig(dim=dim, **self.ranker)

    def run_stem(self, seed: int) -> str:
        return f"{self.policy}_{self.click_model.name}_seed{seed}"

    def to_dict(self) -> dict:
        d = {
            "policy": self.policy,
            "rounds": self.rounds,
            "seeds": list(self.seeds),
            "click_model": dataclasses.asdict(self.click_model),
            "dataset": dataclasses.asdict(self.dataset),
            "ranker": dict(self.ranker),
            "baseline": dataclasses.asdict(self.baseline) if self.baseline else None,
            "gamma": self.gamma,
            "output_dir": self.output_dir,
            "checkpoint_every": self.checkpoint_every,
            "refit_every": self.refit_every,
            "eval_every": self.eval_every,
        }
        d["click_model"]["click_prob"] = list(self.click_model.click_prob)
        d["click_model"]["stop_prob"] = list(self.click_model.stop_prob)
        d["click_model"]["bins"] = list(self.click_model.bins)
        return d

    @classmethod
    def from_dict(cls, raw: dict, env_override: bool = True) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        raw = dict(raw)
        try:
            cm = raw.pop("click_model", "perfect")
            click_model = get_click_model(cm) if isinstance(cm, str) else ClickModelConfig.from_dict(cm)
            ds = raw.pop("dataset", None)
            if not isinstance(ds, dict):
                raise ConfigError("dataset section is required")
            dataset = DataConfig(**ds)
            base = raw.pop("baseline", None)
            baseline = BaselineConfig(**base) if base else None
            if env_override and os.environ.get(OUTPUT_DIR_ENV):
                raw["output_dir"] = os.environ[OUTPUT_DIR_ENV]
            if "seeds" in raw:
                raw["seeds"] = [int(s) for s in raw["seeds"]]
            return cls(dataset=dataset, click_model=click_model, baseline=baseline, **raw)
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as e:
            raise ConfigError(str(e)) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed config: {e}") from None
    return ExperimentConfig.from_dict(raw)
