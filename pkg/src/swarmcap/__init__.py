"""Deterministic 2D swarm simulator for signal-guided target encapsulation."""

__version__ = "0.1.0"

from .config import ExperimentSpec, SimConfig, load_config, load_experiment
from .engine import RunResult, Simulation, run, validate_config
from .harness import MetricsSummary, run_experiment

__all__ = [
    "ExperimentSpec",
    "MetricsSummary",
    "RunResult",
    "SimConfig",
    "Simulation",
    "load_config",
    "load_experiment",
    "run",
    "run_experiment",
    "validate_config",
    "__version__",
]
