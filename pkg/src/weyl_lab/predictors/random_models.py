"""Potenciales aleatorios equivariantes y densidad de estados por Monte-Carlo."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy import fft, linalg

from ..errors import ConfigurationError, DomainError, DosError, GeometryError, WeylLabError
from ..quantize import DiscretizedOperator, GridSpec
from ..symbols.fields import SpatialProfile
from ..tables import write_csv

LOGGER = logging.getLogger("weyl_lab.predictors")

COUPLING_LAWS = ("rademacher", "uniform", "deterministic", "quasi_periodic")
GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
MAX_SKIP_FRACTION = 0.10


@dataclass(frozen=True)
class RandomModel:
    """``V(x, ε) = coupling·Σ_n V₀(x + n·spacing)·ε_n`` sobre los trasladados de la red en el toro.

    Cada muestra ``ω`` usa el generador ``default_rng([seed, ω])``, de modo que el resultado no
    depende del orden de ejecución.
    """

    base: SpatialProfile
    law: str = "rademacher"
    sample_count: int = 64
    seed: int = 0
    coupling: float = 1.0
    spacing: float = 1.0
    frequency: float = GOLDEN_RATIO

    def __post_init__(self) -> None:
        if self.law not in COUPLING_LAWS:
            raise ConfigurationError(f"Ley desconocida '{self.law}'; disponibles {COUPLING_LAWS}.")
        if self.sample_count < 1:
            raise ConfigurationError(f"sample_count debe ser >= 1 (recibido {self.sample_count}).")
        if self.spacing <= 0:
            raise ConfigurationError("El paso de la red debe ser positivo.")
        if self.base.n != 1:
            raise ConfigurationError("El perfil base del potencial debe ser escalar.")

    @property
    def dim(self) -> int:
        return self.base.dim

    def lattice(self, grid: GridSpec) -> tuple[int, int]:
        """``(sitios por eje, puntos de malla por sitio)``."""

        if grid.dim != self.dim:
            raise GeometryError(f"Modelo de dimensión {self.dim} en malla de dimensión {grid.dim}.")
        stride = self.spacing / grid.spacing
        sites = grid.length / self.spacing
        if abs(stride - round(stride)) > 1e-9 or abs(sites - round(sites)) > 1e-9:
            raise GeometryError(
                f"La red de paso {self.spacing} no encaja en la malla (h={grid.spacing}, "
                f"L={grid.length})."
            )
        return int(round(sites)), int(round(stride))

    def couplings(self, grid: GridSpec, index: int) -> np.ndarray:
        """Acoplamientos ``ε_n`` de la muestra ``index``, forma ``(sitios,)*d``."""

        sites, _ = self.lattice(grid)
        shape = (sites,) * self.dim
        rng = np.random.default_rng([self.seed, index])
        if self.law == "rademacher":
            return rng.choice(np.array([-1.0, 1.0]), size=shape)
        if self.law == "uniform":
            return rng.uniform(-1.0, 1.0, size=shape)
        if self.law == "deterministic":
            return np.zeros(shape)
        # Cuasi-periódico: frecuencia redondeada al toro para que el potencial sea periódico.
        wave = round(self.frequency * sites) / sites
        phase = rng.uniform(0.0, 2.0 * math.pi)
        grids = np.meshgrid(*[np.arange(sites)] * self.dim, indexing="ij")
        return np.cos(2.0 * math.pi * wave * sum(grids) + phase)

    def potential_from(self, grid: GridSpec, couplings: np.ndarray) -> np.ndarray:
        """Potencial en los puntos de la malla, ``(Npts^d,)`` en orden C."""

        sites, stride = self.lattice(grid)
        shape = (grid.npts,) * self.dim
        base = self.base.values(grid.points())[:, 0, 0].reshape(shape)
        spread = np.zeros(shape, dtype=complex)
        spread[(slice(None, None, stride),) * self.dim] = couplings
        # V[j] = Σ_m E[m]·V₀[j + m]: correlación circular.
        correlation = fft.ifftn(np.conj(fft.fftn(spread)) * fft.fftn(base))
        return self.coupling * np.real(correlation).reshape(-1)

    def potential(self, grid: GridSpec, index: int) -> np.ndarray:
        return self.potential_from(grid, self.couplings(grid, index))

    def to_payload(self) -> dict[str, Any]:
        return {
            "law": self.law,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "coupling": self.coupling,
            "spacing": self.spacing,
        }


def shift_couplings(couplings: np.ndarray, shift: Sequence[int]) -> np.ndarray:
    """Acción ``ε ↦ ε_{· - k}`` de la red: ``V(x + k, ε) = V(x, shift(ε, k))``."""

    return np.roll(couplings, tuple(int(k) for k in shift), axis=tuple(range(len(shift))))


@dataclass(frozen=True)
class DosCurve:
    lambdas: tuple[float, ...]
    mean: tuple[float, ...]
    stderr: tuple[float, ...]
    samples_used: int
    skipped: int

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.lambdas, self.mean, self.stderr))

    def to_csv(self, path: Path | str) -> Path:
        return write_csv(path, ("lambda", "dos", "stderr"), self.rows())


OperatorBuilder = Callable[[np.ndarray], DiscretizedOperator]


def _sample_counts(
    model: RandomModel,
    builder: OperatorBuilder,
    lambdas: np.ndarray,
    grid: GridSpec,
    index: int,
) -> np.ndarray | None:
    try:
        operator = builder(model.potential(grid, index))
        if not operator.is_hermitian():
            raise DomainError(f"La muestra {index} no produjo un operador hermítico.")
        eigenvalues = linalg.eigvalsh(operator.matrix)
    except (WeylLabError, linalg.LinAlgError, ValueError) as exc:
        LOGGER.warning("Muestra %d descartada: %s", index, exc)
        return None
    weight = float(operator.trace_weights[0])
    # Autovalores en [0, λ]; los negativos del potencial no cuentan.
    below_zero = np.searchsorted(eigenvalues, 0.0, side="left")
    counts = (np.searchsorted(eigenvalues, lambdas, side="right") - below_zero) * weight
    counts = np.maximum(counts, 0.0)
    return counts / grid.volume


def dos_estimate(
    model: RandomModel,
    builder: OperatorBuilder,
    lambdas: Sequence[float],
    grid: GridSpec,
    workers: int | None = None,
) -> DosCurve:
    """``N̂(λ)``: media de Monte-Carlo de ``#{autovalores en [0, λ]}`` por volumen del toro.

    Devuelve también el error estándar de la media sobre las muestras válidas.
    """

    grid_lambdas = np.asarray(lambdas, dtype=float)

    def run(index: int) -> np.ndarray | None:
        return _sample_counts(model, builder, grid_lambdas, grid, index)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, range(model.sample_count)))
    counts = [r for r in results if r is not None]
    skipped = model.sample_count - len(counts)
    if skipped > MAX_SKIP_FRACTION * model.sample_count:
        raise DosError(
            f"Se descartaron {skipped} de {model.sample_count} muestras "
            f"(máximo {MAX_SKIP_FRACTION:.0%})."
        )
    stack = np.stack(counts)
    mean = stack.mean(axis=0)
    if len(counts) > 1:
        stderr = stack.std(axis=0, ddof=1) / math.sqrt(len(counts))
    else:
        stderr = np.zeros_like(mean)
    LOGGER.debug("DOS con %d muestras (%d descartadas)", len(counts), skipped)
    return DosCurve(
        tuple(float(v) for v in grid_lambdas),
        tuple(float(v) for v in mean),
        tuple(float(v) for v in stderr),
        len(counts),
        skipped,
    )


__all__ = [
    "COUPLING_LAWS",
    "DosCurve",
    "GOLDEN_RATIO",
    "RandomModel",
    "dos_estimate",
    "shift_couplings",
]
