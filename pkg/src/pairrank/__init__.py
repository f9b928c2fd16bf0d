"""Online pairwise learning to rank with certainty-driven block exploration."""
from .config import ConfigError, ExperimentConfig, load_config
from .harness import run_experiment, run_replicate
from .partition import PartitionError, ShuffleMode, partition_documents, render_ranked_list
from .ranker import PairwiseObservation, RankerConfig, RankerState, alpha, fit

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PairwiseObservation",
    "PartitionError",
    "RankerConfig",
    "RankerState",
    "ShuffleMode",
    "alpha",
    "fit",
    "load_config",
    "partition_documents",
    "render_ranked_list",
    "run_experiment",
    "run_replicate",
]
__version__ = "0.1.0"
