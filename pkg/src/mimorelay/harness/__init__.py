from .config import ExperimentConfig, parse_config
from .experiments import REGISTRY, run_experiment
from .io import ResultRow, emit

__all__ = ["ExperimentConfig", "parse_config", "REGISTRY", "run_experiment", "ResultRow", "emit"]
