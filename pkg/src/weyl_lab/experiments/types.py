"""Tipos públicos de los experimentos: configuración validada, resultados y definiciones."""

from __future__ import annotations

import copy
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

Comparison = Literal["relative", "absolute"]


@dataclass(frozen=True)
class GridSection:
    dim: int
    npts: int
    length: float | None = None


@dataclass(frozen=True)
class Tolerances:
    relative: float = 0.1
    absolute: float = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    """Experimento ya validado; ``payload`` conserva el JSON resuelto para el manifiesto."""

    experiment: str
    grid: GridSection
    parameters: Mapping[str, Any]
    tolerances: Tolerances
    output_dir: Path
    seed: int = 0
    symbol: Mapping[str, Any] | None = None
    profile: Mapping[str, Any] | None = None
    model: Mapping[str, Any] | None = None
    workers: int | None = None
    payload: Mapping[str, Any] = field(default_factory=dict, repr=False)
    source: Path | None = None

    def raw(self) -> dict[str, Any]:
        """Copia profunda editable del JSON resuelto."""

        return copy.deepcopy(dict(self.payload))

    def to_manifest(self) -> dict[str, Any]:
        manifest = self.raw()
        manifest["workers"] = self.workers
        manifest["source"] = str(self.source) if self.source else None
        return manifest


@dataclass(frozen=True)
class PipelineResult:
    """Valor predicho y medido, serie para ``results.csv`` y comprobaciones adicionales.

    ``checks`` recoge errores (relativos o absolutos según ``comparison``) que deben quedar
    también dentro de la tolerancia, salvo los que tengan umbral propio en ``limits``.
    """

    predicted: float
    measured: float
    header: tuple[str, ...]
    rows: Sequence[Sequence[Any]]
    details: Mapping[str, Any] = field(default_factory=dict)
    checks: Mapping[str, float] = field(default_factory=dict)
    limits: Mapping[str, float] = field(default_factory=dict)
    comparison: Comparison = "relative"


Pipeline = Callable[[ExperimentConfig], PipelineResult]


@dataclass(frozen=True)
class ExperimentDefinition:
    """Describe un experimento registrado y el resultado teórico que comprueba."""

    name: str
    anchor: str
    pipeline: Pipeline
    parameters: Mapping[str, Any] = field(default_factory=dict)
    requires: tuple[str, ...] = ()
    min_dim: int = 1
    description_key: str | None = None
    multiplier_spectrum: bool = False

    def resolve_parameters(self, given: Mapping[str, Any]) -> dict[str, Any]:
        resolved = copy.deepcopy(dict(self.parameters))
        resolved.update(given)
        return resolved


__all__ = [
    "Comparison",
    "ExperimentConfig",
    "ExperimentDefinition",
    "GridSection",
    "Pipeline",
    "PipelineResult",
    "Tolerances",
]
