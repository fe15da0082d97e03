"""Ejecución de experimentos: pipeline, comparación con la predicción y artefactos."""

from __future__ import annotations

import json
import logging
import math
import platform
import re
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from .. import __version__
from ..config import CONFIG
from ..errors import ExperimentConfigError, WeylLabError
from ..tables import write_csv
from .config import with_field
from .registry import REGISTRY, ExperimentRegistry
from .types import ExperimentConfig, PipelineResult

LOGGER = logging.getLogger("weyl_lab.experiments")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TOLERANCE = 2


@dataclass(frozen=True)
class ExitReport:
    """Resumen de una ejecución tal como se escribe en ``summary.json``."""

    experiment: str
    status: int
    predicted: float
    measured: float
    error: float
    tolerance: float
    comparison: str
    output_dir: Path
    wall_time: float = 0.0
    checks: Mapping[str, float] = field(default_factory=dict)
    message: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == EXIT_OK


@dataclass(frozen=True)
class SweepReport:
    parameter: str
    reports: tuple[ExitReport, ...]
    table: Path

    @property
    def status(self) -> int:
        return max((report.status for report in self.reports), default=EXIT_ERROR)


# ----------------------------------------------------------------------
# Serialización
# ----------------------------------------------------------------------
def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Tipo no serializable: {type(value).__name__}")


def _write_json(path: Path, payload: Mapping[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, ensure_ascii=False, default=_json_default) + "\n",
        encoding="utf-8",
    )
    return path


def _environment() -> dict[str, str]:
    return {
        "weyl_lab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


# ----------------------------------------------------------------------
# Comparación
# ----------------------------------------------------------------------
def compare(result: PipelineResult, config: ExperimentConfig) -> tuple[float, float, bool]:
    """Devuelve ``(error, tolerancia, aprobado)`` según el tipo de comparación del resultado."""

    difference = abs(result.measured - result.predicted)
    if result.comparison == "absolute":
        error = difference
        tolerance = config.tolerances.absolute
    else:
        scale = abs(result.predicted)
        error = difference / scale if scale > 0 else difference
        tolerance = config.tolerances.relative
    bounds = [(error, tolerance)]
    bounds += [(value, result.limits.get(name, tolerance)) for name, value in result.checks.items()]
    passed = all(math.isfinite(value) and value <= bound for value, bound in bounds)
    return error, tolerance, passed


def run_experiment(
    config: ExperimentConfig, registry: ExperimentRegistry = REGISTRY
) -> ExitReport:
    """Ejecuta el pipeline de ``config`` y escribe ``results.csv``, ``summary.json`` y
    ``manifest.json`` en ``config.output_dir``.

    Los errores de la biblioteca se propagan; la CLI los convierte en estado 1.
    """

    definition = registry.get(config.experiment)
    output_dir = config.output_dir
    output_dir.mkdir(parents=True, exist_ok=True)
    _write_json(
        output_dir / "manifest.json",
        {"config": config.to_manifest(), "environment": _environment()},
    )
    LOGGER.info("Ejecutando '%s' (semilla %d) en %s", config.experiment, config.seed, output_dir)

    started = time.perf_counter()
    result = definition.pipeline(config)
    wall_time = time.perf_counter() - started

    error, tolerance, passed = compare(result, config)
    status = EXIT_OK if passed else EXIT_TOLERANCE
    write_csv(
        output_dir / "results.csv",
        result.header,
        result.rows,
        precision=CONFIG.output.csv_precision,
    )
    summary = {
        "experiment": config.experiment,
        "anchor": definition.anchor,
        "predicted": result.predicted,
        "measured": result.measured,
        "comparison": result.comparison,
        "error": error,
        "tolerance": tolerance,
        "pass": passed,
        "checks": dict(result.checks),
        "limits": dict(result.limits),
        "seed": config.seed,
        "wall_time": wall_time,
        "details": dict(result.details),
    }
    _write_json(output_dir / "summary.json", summary)
    log = LOGGER.info if passed else LOGGER.warning
    log(
        "'%s': predicho %.6g, medido %.6g, error %.3g (tolerancia %.3g) en %.2fs",
        config.experiment,
        result.predicted,
        result.measured,
        error,
        tolerance,
        wall_time,
    )
    return ExitReport(
        experiment=config.experiment,
        status=status,
        predicted=result.predicted,
        measured=result.measured,
        error=error,
        tolerance=tolerance,
        comparison=result.comparison,
        output_dir=output_dir,
        wall_time=wall_time,
        checks=dict(result.checks),
    )


# ----------------------------------------------------------------------
# Barridos
# ----------------------------------------------------------------------
def _slug(value: Any) -> str:
    text = value if isinstance(value, str) else json.dumps(value)
    return re.sub(r"[^A-Za-z0-9.+-]+", "_", text).strip("_") or "value"


def sweep(
    config: ExperimentConfig,
    parameter: str,
    values: Sequence[Any],
    registry: ExperimentRegistry = REGISTRY,
) -> SweepReport:
    """Repite ``config`` para cada valor de ``parameter`` (ruta con puntos, p. ej. ``grid.npts``).

    Cada valor se ejecuta en ``<output_dir>/<índice>_<valor>``; ``sweep.csv`` resume todos.
    """

    if not values:
        raise ExperimentConfigError("la lista de valores está vacía", "values")
    reports: list[ExitReport] = []
    rows: list[tuple[Any, ...]] = []
    for index, value in enumerate(values):
        target = config.output_dir / f"{index:03d}_{_slug(value)}"
        try:
            variant = with_field(
                with_field(config, parameter, value, registry), "output_dir", str(target), registry
            )
            report = run_experiment(variant, registry)
        except WeylLabError as exc:
            LOGGER.error("Barrido %s=%r falló: %s", parameter, value, exc, exc_info=True)
            report = ExitReport(
                experiment=config.experiment,
                status=EXIT_ERROR,
                predicted=math.nan,
                measured=math.nan,
                error=math.nan,
                tolerance=math.nan,
                comparison="relative",
                output_dir=target,
                message=str(exc),
            )
        reports.append(report)
        cell = value if isinstance(value, (int, float, str)) else json.dumps(value)
        rows.append(
            (cell, report.predicted, report.measured, report.error, report.status, target.name)
        )
    table = write_csv(
        config.output_dir / "sweep.csv",
        (parameter, "predicted", "measured", "error", "status", "directory"),
        rows,
        precision=CONFIG.output.csv_precision,
    )
    return SweepReport(parameter, tuple(reports), table)


__all__ = [
    "EXIT_ERROR",
    "EXIT_OK",
    "EXIT_TOLERANCE",
    "ExitReport",
    "SweepReport",
    "compare",
    "run_experiment",
    "sweep",
]
