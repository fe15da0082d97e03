"""Funciones de valores singulares con pesos de traza y extracción de límites de Weyl."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import linalg

from .errors import ConfigurationError, DomainError, NumericalError, RangeError
from .quantize import DiscretizedOperator
from .tables import write_csv

LOGGER = logging.getLogger("weyl_lab.spectral")

WEYL_WINDOW = (0.02, 0.15)
WEYL_POINTS = 200
_IMAG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SingularValueFunction:
    """``t ↦ μ(t)`` como escalera continua por la derecha."""

    values: np.ndarray
    weights: np.ndarray
    cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if values.shape != weights.shape or values.ndim != 1:
            raise ConfigurationError("Valores y pesos deben ser vectores de la misma longitud.")
        if np.any(values < 0) or np.any(weights <= 0):
            raise ConfigurationError("Los valores deben ser >= 0 y los pesos > 0.")
        order = np.argsort(-values, kind="stable")
        object.__setattr__(self, "values", values[order])
        object.__setattr__(self, "weights", weights[order])
        object.__setattr__(self, "cumulative", np.cumsum(weights[order]))

    @classmethod
    def from_values(cls, values: Any, weight: float | Any = 1.0) -> SingularValueFunction:
        values = np.abs(np.asarray(values, dtype=float))
        return cls(values, np.broadcast_to(np.asarray(weight, float), values.shape).copy())

    @classmethod
    def merge(cls, functions: Sequence[SingularValueFunction]) -> SingularValueFunction:
        """Unión de muestras de Monte-Carlo con peso ``1/S`` por muestra."""

        if not functions:
            raise ConfigurationError("No hay funciones de valores singulares que combinar.")
        scale = 1.0 / len(functions)
        return cls(
            np.concatenate([f.values for f in functions]),
            np.concatenate([f.weights * scale for f in functions]),
        )

    @property
    def total_weight(self) -> float:
        return float(self.cumulative[-1]) if self.cumulative.size else 0.0

    @property
    def is_zero(self) -> bool:
        return not self.values.size or float(self.values[0]) == 0.0

    def __call__(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        index = np.searchsorted(self.cumulative, t, side="right")
        padded = np.append(self.values, 0.0)
        return padded[np.minimum(index, self.values.size)]

    def distribution(self, s: Any) -> np.ndarray:
        """Peso total de los valores estrictamente mayores que ``s``."""

        s = np.asarray(s, dtype=float)
        ascending = self.values[::-1]
        count = self.values.size - np.searchsorted(ascending, s, side="right")
        padded = np.concatenate([[0.0], self.cumulative])
        return padded[count]

    def integral(self, upper: float) -> float:
        """``∫_0^N μ(t) dt`` exacta sobre la escalera."""

        if upper <= 0:
            return 0.0
        starts = self.cumulative - self.weights
        covered = np.clip(upper - starts, 0.0, self.weights)
        return float(np.sum(covered * self.values))

    def to_csv(self, path: Path | str, points: int = WEYL_POINTS) -> Path:
        """Exporta ``(t, μ(t))`` sobre una malla logarítmica."""

        lower = float(np.min(self.weights)) if self.weights.size else 1.0
        upper = max(self.total_weight, lower * 1.0001)
        grid = np.geomspace(lower, upper, points)
        return write_csv(path, ("t", "mu"), zip(grid, self(grid)))


@dataclass(frozen=True)
class WeylEstimate:
    """``lim t^{m/d} μ(t)`` medido como mediana sobre una ventana, con el IQR como dispersión."""

    limit: float
    window: tuple[float, float]
    spread: float
    grids_used: tuple[Any, ...] = ()
    exponent: float = 0.0

    def to_payload(self) -> dict[str, Any]:
        return {
            "limit": self.limit,
            "window": list(self.window),
            "spread": self.spread,
            "grids_used": list(self.grids_used),
            "exponent": self.exponent,
        }


def _require_uniform_weights(operator: DiscretizedOperator) -> float:
    weights = operator.trace_weights
    if not np.allclose(weights, weights[0], rtol=1e-12, atol=0.0):
        raise ConfigurationError(
            "Los valores singulares requieren pesos de traza uniformes; combine muestras con merge."
        )
    return float(weights[0])


def _singular_values(matrix: np.ndarray, driver: str = "gesdd") -> np.ndarray:
    try:
        return linalg.svd(matrix, compute_uv=False, lapack_driver=driver, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        if driver != "gesvd":
            LOGGER.warning("SVD con %s falló (%s); reintentando con gesvd", driver, exc)
            return _singular_values(matrix, "gesvd")
        finite = bool(np.all(np.isfinite(matrix)))
        norm = float(np.linalg.norm(matrix)) if finite else math.inf
        raise NumericalError(
            f"La SVD falló para una matriz {matrix.shape} (finita={finite}, ‖A‖_F={norm:.3e})."
        ) from exc


def singular_value_function(
    operator: DiscretizedOperator, driver: str = "gesdd", columns: Any | None = None
) -> SingularValueFunction:
    """SVF del operador; con ``columns`` el dominio se restringe a esos índices.

    Para ``T = T·M_χ`` (soporte compacto por la derecha) los valores singulares no nulos no
    cambian, pero el peso total pasa a ser el del soporte.
    """

    weight = _require_uniform_weights(operator)
    matrix = operator.matrix
    if columns is not None:
        columns = np.asarray(columns, dtype=int)
        if columns.ndim != 1 or not columns.size:
            raise ConfigurationError("La restricción de dominio necesita al menos un índice.")
        matrix = matrix[:, columns]
    values = _singular_values(matrix, driver)
    LOGGER.debug("SVD de '%s': forma %s, μ(0)=%.6g", operator.label, matrix.shape, values[0])
    return SingularValueFunction.from_values(values, weight)


def eigenvalue_functions(
    operator: DiscretizedOperator,
) -> tuple[SingularValueFunction, SingularValueFunction]:
    """``(μ⁺, μ⁻)``: autovalores positivos y módulos de los negativos de un operador hermítico."""

    if not operator.is_hermitian():
        raise DomainError(f"'{operator.label}' no es hermítico.")
    weight = _require_uniform_weights(operator)
    eigenvalues = linalg.eigvalsh(operator.matrix)
    positive = eigenvalues[eigenvalues > 0]
    negative = -eigenvalues[eigenvalues < 0]
    return (
        SingularValueFunction.from_values(positive, weight),
        SingularValueFunction.from_values(negative, weight),
    )


def default_window(svf: SingularValueFunction) -> tuple[float, float]:
    total = svf.total_weight
    return WEYL_WINDOW[0] * total, WEYL_WINDOW[1] * total


def weyl_limit(
    svf: SingularValueFunction,
    m: float,
    d: int,
    window: tuple[float, float] | None = None,
    points: int = WEYL_POINTS,
) -> WeylEstimate:
    if m <= 0 or d <= 0:
        raise RangeError(f"Se requiere m > 0 y d > 0 (recibido m={m}, d={d}).")
    lower, upper = window or default_window(svf)
    total = svf.total_weight
    if not 0 < lower < upper or upper > 0.5 * total * (1 + 1e-12):
        raise RangeError(
            f"Ventana ({lower:g}, {upper:g}) vacía o fuera de (0, {0.5 * total:g}]."
        )
    exponent = m / d
    t = np.geomspace(lower, upper, points)
    samples = t**exponent * svf(t)
    q1, median, q3 = np.percentile(samples, [25, 50, 75])
    LOGGER.debug("Límite de Weyl %.6g ± %.3g en (%.4g, %.4g)", median, q3 - q1, lower, upper)
    return WeylEstimate(float(median), (float(lower), float(upper)), float(q3 - q1), (), exponent)


def weyl_curve(
    svf: SingularValueFunction, m: float, d: int, window: tuple[float, float] | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Serie ``(t, t^{m/d}μ(t))`` sobre la ventana."""

    lower, upper = window or default_window(svf)
    t = np.geomspace(lower, upper, WEYL_POINTS)
    return t, t ** (m / d) * svf(t)


def dixmier_log_average(svf: SingularValueFunction, nmax: float) -> float:
    """``(1/log N)·∫_0^N μ(t) dt``."""

    if nmax > svf.total_weight * (1 + 1e-12):
        raise RangeError(f"N={nmax:g} supera el peso total {svf.total_weight:g}.")
    if nmax <= 1.0:
        raise RangeError(f"N={nmax:g} debe ser > 1 para el promedio logarítmico.")
    return svf.integral(nmax) / math.log(nmax)


def weak_quasinorm(svf: SingularValueFunction, p: float) -> float:
    """``sup_t t^{1/p}·μ(t)`` (alcanzado en el extremo derecho de cada escalón)."""

    if p <= 0:
        raise RangeError(f"p debe ser positivo (recibido {p}).")
    if svf.is_zero:
        return 0.0
    return float(np.max(svf.cumulative ** (1.0 / p) * svf.values))


# ----------------------------------------------------------------------
# Conteo microlocal
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CountingSpectrum:
    """Autovalores de ``A`` con la contribución de cada autovector a ``Tr(M_φ Q ·)``."""

    eigenvalues: np.ndarray
    contributions: np.ndarray

    def count(self, lam: float) -> complex:
        mask = (self.eigenvalues >= 0) & (self.eigenvalues <= lam)
        return complex(np.sum(self.contributions[mask]))

    def curve(self, lambdas: Sequence[float]) -> np.ndarray:
        return np.array([self.count(lam) for lam in lambdas])


def counting_spectrum(
    operator: DiscretizedOperator,
    observable: DiscretizedOperator | None = None,
    localizer: DiscretizedOperator | None = None,
) -> CountingSpectrum:
    if not operator.is_hermitian():
        raise DomainError(
            f"El conteo microlocal requiere un operador hermítico ('{operator.label}')."
        )
    eigenvalues, vectors = linalg.eigh(operator.matrix)
    product = np.eye(operator.side, dtype=complex)
    for factor in (observable, localizer):
        if factor is not None:
            operator._check_compatible(factor)
            product = factor.matrix @ product
    mapped = product @ vectors
    contributions = np.einsum("r,ri,ri->i", operator.trace_weights, vectors.conj(), mapped)
    return CountingSpectrum(eigenvalues, contributions)


def _real_count(value: complex, lam: float) -> float:
    if abs(value.imag) > _IMAG_TOL * max(abs(value), 1e-300):
        LOGGER.warning("Parte imaginaria %.3e en el conteo a λ=%g", value.imag, lam)
    return float(value.real)


def microlocal_counting(
    operator: DiscretizedOperator,
    observable: DiscretizedOperator | None,
    localizer: DiscretizedOperator | None,
    lam: float,
) -> float:
    """``Tr(M_φ Q χ_{[0,λ]}(A))``."""

    spectrum = counting_spectrum(operator, observable, localizer)
    return _real_count(spectrum.count(lam), lam)


def microlocal_counting_curve(
    operator: DiscretizedOperator,
    observable: DiscretizedOperator | None,
    localizer: DiscretizedOperator | None,
    lambdas: Sequence[float],
) -> np.ndarray:
    """Conteo para todos los ``λ`` con una sola diagonalización."""

    spectrum = counting_spectrum(operator, observable, localizer)
    return np.array([_real_count(v, lam) for v, lam in zip(spectrum.curve(lambdas), lambdas)])


# ----------------------------------------------------------------------
# Dualidad tauberiana
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class TauberianReport:
    s_values: tuple[float, ...]
    distribution_side: tuple[float, ...]
    singular_side: tuple[float, ...]
    distribution_limit: float
    singular_limit: float
    discrepancy: float

    def to_payload(self) -> dict[str, Any]:
        return {
            "distribution_limit": self.distribution_limit,
            "singular_limit": self.singular_limit,
            "discrepancy": self.discrepancy,
        }


def tauberian_duality_check(
    svf: SingularValueFunction, p: float, s_grid: Sequence[float] | None = None
) -> TauberianReport:
    """Compara ``s^p·d_s`` con ``t·μ(t)^p`` en ``t = d_s``."""

    if p <= 0:
        raise RangeError(f"p debe ser positivo (recibido {p}).")
    if s_grid is None:
        lower, upper = default_window(svf)
        s_grid = np.geomspace(float(svf(upper)), float(svf(lower)), 50)
    s = np.asarray(s_grid, dtype=float)
    distribution = svf.distribution(s)
    left = s**p * distribution
    right = distribution * svf(distribution) ** p
    live = (left > 0) & (right > 0)
    if not np.any(live):
        return TauberianReport(tuple(s), tuple(left), tuple(right), 0.0, 0.0, 0.0)
    relative = np.abs(left[live] - right[live]) / np.maximum(np.abs(left[live]), 1e-300)
    return TauberianReport(
        tuple(float(v) for v in s),
        tuple(float(v) for v in left),
        tuple(float(v) for v in right),
        float(np.median(left[live])),
        float(np.median(right[live])),
        float(np.max(relative)),
    )


# ----------------------------------------------------------------------
# Submultiplicatividad
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SubmultiplicativityReport:
    samples: int
    violations: int
    worst_excess: float


def _as_matrix(value: DiscretizedOperator | np.ndarray) -> np.ndarray:
    return value.matrix if isinstance(value, DiscretizedOperator) else np.asarray(value)


def check_submultiplicativity(
    first: DiscretizedOperator | np.ndarray,
    second: DiscretizedOperator | np.ndarray,
    samples: int = 100,
    seed: int = 0,
    tol: float = 1e-10,
) -> SubmultiplicativityReport:
    """Comprueba ``μ(t+s, AB) <= μ(t, A)·μ(s, B)`` en pares ``(t, s)`` aleatorios."""

    a = _as_matrix(first)
    b = _as_matrix(second)
    mu_a = SingularValueFunction.from_values(_singular_values(a))
    mu_b = SingularValueFunction.from_values(_singular_values(b))
    mu_ab = SingularValueFunction.from_values(_singular_values(a @ b))
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, a.shape[0], samples)
    s = rng.uniform(0.0, b.shape[0], samples)
    scale = max(float(mu_a(0.0)) * float(mu_b(0.0)), 1e-300)
    excess = mu_ab(t + s) - mu_a(t) * mu_b(s)
    violations = int(np.count_nonzero(excess > tol * scale))
    return SubmultiplicativityReport(samples, violations, float(np.max(excess) / scale))


__all__ = [
    "CountingSpectrum",
    "SingularValueFunction",
    "SubmultiplicativityReport",
    "TauberianReport",
    "WEYL_WINDOW",
    "WeylEstimate",
    "check_submultiplicativity",
    "counting_spectrum",
    "default_window",
    "dixmier_log_average",
    "eigenvalue_functions",
    "microlocal_counting",
    "microlocal_counting_curve",
    "singular_value_function",
    "tauberian_duality_check",
    "weak_quasinorm",
    "weyl_curve",
    "weyl_limit",
]
