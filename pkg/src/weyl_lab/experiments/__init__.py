"""Experimentos reproducibles: registro, lectura de configuración y ejecución."""

from .config import build_experiment, load_experiment, parse_experiment, with_field
from .registry import REGISTRY, ExperimentRegistry
from .runner import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_TOLERANCE,
    ExitReport,
    SweepReport,
    run_experiment,
    sweep,
)
from .types import (
    ExperimentConfig,
    ExperimentDefinition,
    GridSection,
    PipelineResult,
    Tolerances,
)

__all__ = [
    "EXIT_ERROR",
    "EXIT_OK",
    "EXIT_TOLERANCE",
    "ExitReport",
    "ExperimentConfig",
    "ExperimentDefinition",
    "ExperimentRegistry",
    "GridSection",
    "PipelineResult",
    "REGISTRY",
    "SweepReport",
    "Tolerances",
    "build_experiment",
    "load_experiment",
    "parse_experiment",
    "run_experiment",
    "sweep",
    "with_field",
]
