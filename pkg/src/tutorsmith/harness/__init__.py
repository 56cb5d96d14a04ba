from .ideal_tutor import train_on_problem
from .metrics import completeness, precision_at, productive_monotonicity
from .runner import ExperimentConfig, run_experiment

__all__ = [
    "ExperimentConfig",
    "completeness",
    "precision_at",
    "productive_monotonicity",
    "run_experiment",
    "train_on_problem",
]
