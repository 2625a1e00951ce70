"""Experiment harness: configuration, seeded orchestration, CSV artifacts,
and figure rendering behind the ``mimo-dense`` command-line interface."""

from .config import ExperimentConfig, load_config
from .experiments import ExperimentResult, run_experiment

__all__ = ["ExperimentConfig", "ExperimentResult", "load_config", "run_experiment"]
