"""Funciones zeta localizadas y extracción del residuo en el polo ``z = d/m``."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy import linalg

from .elliptic import require_positive
from .errors import ConfigurationError, DomainError, FitError, RangeError
from .powers import matrix_power
from .quadrature import Box, box_rule, sphere_rule
from .quantize import DiscretizedOperator, GridSpec, multiplication_op
from .symbols.classical import ClassicalSymbol, evaluate_symbol
from .symbols.fields import SpatialProfile
from .symbols.jets import jet_cache
from .tables import write_csv

LOGGER = logging.getLogger("weyl_lab.zeta")

POLE_MARGIN = 1e-3
FIT_WINDOW = 0.5
MAX_CONDITION = 1e10
DEFAULT_SPACE_NODES = 24
DEFAULT_OFFSETS = tuple(np.linspace(0.1, 0.5, 9))


@dataclass(frozen=True)
class ZetaSample:
    """Valores de ``ζ`` a la derecha del polo (``cutoff`` es el corte espectral usado)."""

    z_values: tuple[complex, ...]
    values: tuple[complex, ...]
    pole: float
    cutoff: float | None = None

    def __post_init__(self) -> None:
        if len(self.z_values) != len(self.values):
            raise ConfigurationError("z_values y values deben tener la misma longitud.")
        for z in self.z_values:
            if complex(z).real <= self.pole + POLE_MARGIN:
                raise RangeError(f"z={z} no supera el polo {self.pole} + {POLE_MARGIN}.")

    def to_rows(self) -> list[tuple[float, float, float, float]]:
        return [
            (complex(z).real, complex(z).imag, complex(v).real, complex(v).imag)
            for z, v in zip(self.z_values, self.values)
        ]

    def to_csv(self, path: Path | str) -> Path:
        return write_csv(path, ("re_z", "im_z", "re_zeta", "im_zeta"), self.to_rows())


@dataclass(frozen=True)
class FitResult:
    residue: complex
    residual: float
    condition: float
    degree: int
    model: str

    def to_payload(self) -> dict[str, Any]:
        return {
            "residue_re": self.residue.real,
            "residue_im": self.residue.imag,
            "residual": self.residual,
            "condition": self.condition,
            "degree": self.degree,
            "model": self.model,
        }


def default_z_values(pole: float, offsets: Sequence[float] = DEFAULT_OFFSETS) -> list[complex]:
    return [complex(pole + offset) for offset in offsets]


def _pole(symbol: ClassicalSymbol) -> tuple[float, float]:
    m = symbol.real_order
    if m <= 0:
        raise DomainError(f"La función zeta requiere orden positivo (m={m}).")
    return m, symbol.dim / m


def _localizer_box(symbol: ClassicalSymbol, localizer: SpatialProfile) -> Box:
    box = localizer.support or symbol.support
    if box is None:
        raise ConfigurationError("El localizador necesita soporte compacto conocido.")
    return box


def _localized_sphere_integral(
    symbol: ClassicalSymbol,
    localizer: SpatialProfile,
    exponent: complex,
    sphere_nodes: int | None,
    space_nodes: int,
) -> complex:
    """``∫_{S^{d-1}} ∫ τ(φ(x)* σ_m(x,s)^{exponent} φ(x)) dx ds``."""

    x, wx = box_rule(_localizer_box(symbol, localizer), space_nodes)
    u, wu = sphere_rule(symbol.dim, sphere_nodes)
    phi = localizer.values(x)
    if not np.any(phi):
        return 0.0j
    with jet_cache():
        principal = symbol.principal.value(x[:, None, :], u[None, :, :])
    powered = matrix_power(principal, exponent)
    sandwich = np.conj(np.swapaxes(phi, -1, -2))[:, None] @ powered @ phi[:, None]
    traces = symbol.algebra.trace(sandwich)
    return complex(np.einsum("i,j,ij->", wx, wu, traces))


def symbolic_zeta(
    symbol: ClassicalSymbol,
    localizer: SpatialProfile,
    z: complex,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> complex:
    """``ζ_{σ,φ}(z) = (2π)^{-d} ∫∫ τ(φ* σ_m^{-z} φ)`` con el corte radial de los símbolos.

    La parte ``|ξ| >= 1`` se integra en forma cerrada (``1/(mz - d)``) y la transición
    ``1/2 <= |ξ| <= 1`` con la cuadratura del corte.
    """

    m, pole = _pole(symbol)
    z = complex(z)
    if z.real <= pole:
        raise DomainError(f"ζ solo converge para Re z > d/m = {pole:g} (z={z}).")
    angular = _localized_sphere_integral(symbol, localizer, -z, sphere_nodes, space_nodes)
    d = symbol.dim
    radial = symbol.cutoff.radial_moment(d - 1 - m * z) + 1.0 / (m * z - d)
    return angular * radial / (2.0 * math.pi) ** d


def residue_at_pole(
    symbol: ClassicalSymbol,
    localizer: SpatialProfile,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> complex:
    """``(1/(m(2π)^d)) ∫_{S^{d-1}} ∫ τ(φ* σ_m^{-d/m} φ)``."""

    m, pole = _pole(symbol)
    require_positive(symbol)
    angular = _localized_sphere_integral(symbol, localizer, -pole, sphere_nodes, space_nodes)
    return angular / (m * (2.0 * math.pi) ** symbol.dim)


def symbolic_zeta_samples(
    symbol: ClassicalSymbol,
    localizer: SpatialProfile,
    z_values: Sequence[complex] | None = None,
    **quadrature: Any,
) -> ZetaSample:
    _, pole = _pole(symbol)
    zs = list(z_values) if z_values is not None else default_z_values(pole)
    values = [symbolic_zeta(symbol, localizer, z, **quadrature) for z in zs]
    return ZetaSample(tuple(zs), tuple(values), pole)


# ----------------------------------------------------------------------
# Zeta de operadores discretizados
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ZetaSpectrum:
    """Autovalores de ``A`` y pesos ``c_i = Σ_r w_r |(M_φ* v_i)_r|²`` de la traza localizada."""

    eigenvalues: np.ndarray
    weights: np.ndarray
    cutoff: float | None = None

    def __call__(self, z: complex) -> complex:
        keep = slice(None) if self.cutoff is None else self.eigenvalues <= self.cutoff
        powered = np.power(self.eigenvalues[keep].astype(complex), -complex(z))
        return complex(np.sum(self.weights[keep] * powered))

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])


def _localizer_matrix(
    operator: DiscretizedOperator, localizer: DiscretizedOperator | SpatialProfile | None
) -> np.ndarray | None:
    if localizer is None:
        return None
    if isinstance(localizer, SpatialProfile):
        localizer = multiplication_op(localizer.values, operator.grid, n=operator.algebra.n)
    operator._check_compatible(localizer)
    return localizer.matrix


def zeta_spectrum(
    operator: DiscretizedOperator,
    localizer: DiscretizedOperator | SpatialProfile | None = None,
    cutoff: float | None = None,
) -> ZetaSpectrum:
    if not operator.is_hermitian():
        raise DomainError(f"operator_zeta requiere un operador hermítico ('{operator.label}').")
    eigenvalues, vectors = linalg.eigh(operator.matrix)
    if eigenvalues[0] <= 0:
        raise DomainError(
            f"operator_zeta requiere un operador definido positivo (λ_min={eigenvalues[0]:.3g})."
        )
    phi = _localizer_matrix(operator, localizer)
    mapped = vectors if phi is None else phi.conj().T @ vectors
    weights = np.einsum("r,ri->i", operator.trace_weights, np.abs(mapped) ** 2)
    return ZetaSpectrum(eigenvalues, weights, cutoff)


def multiplier_zeta_spectrum(
    symbol: ClassicalSymbol,
    grid: GridSpec,
    localizer: SpatialProfile | None = None,
    shift: float = 0.0,
) -> ZetaSpectrum:
    """Espectro de la parte hermítica de ``Op(σ) + shift`` sin formar la matriz densa.

    Con ``σ`` independiente de ``x`` los autovectores son ``e_k ⊗ w``, con ``w`` autovector
    de ``σ(ξ_k)``, y el peso de cada uno es ``w*·G·w`` con ``G`` la media de ``φφ*`` en la
    malla.
    """

    if symbol.x_dependent:
        raise DomainError(f"'{symbol.name}' depende de x; use zeta_spectrum sobre la matriz.")
    n = symbol.algebra.n
    values = evaluate_symbol(symbol, np.zeros(grid.dim), grid.frequencies())
    hermitian = 0.5 * (values + np.conj(np.swapaxes(values, -1, -2)))
    eigenvalues, vectors = np.linalg.eigh(hermitian)
    eigenvalues = eigenvalues + shift
    if localizer is None:
        gram = np.eye(n, dtype=complex)
    else:
        phi = localizer.values(grid.points())
        gram = np.mean(phi @ np.conj(np.swapaxes(phi, -1, -2)), axis=0)
    weights = np.einsum("kai,ab,kbi->ki", np.conj(vectors), gram, vectors).real
    order = np.argsort(eigenvalues, axis=None, kind="stable")
    eigenvalues = eigenvalues.ravel()[order]
    if eigenvalues[0] <= 0:
        raise DomainError(
            f"operator_zeta requiere un operador definido positivo (λ_min={eigenvalues[0]:.3g})."
        )
    LOGGER.debug("Espectro de multiplicador de '%s': %d autovalores", symbol.name, order.size)
    return ZetaSpectrum(eigenvalues, weights.ravel()[order])


def auto_cutoff(operator_max: float, order: float, dim: int) -> float:
    """Corte ``Λ = (0.9/√d)^m·λ_max``: la bola de frecuencias inscrita en la red cúbica."""

    return (0.9 / math.sqrt(dim)) ** order * operator_max


def operator_zeta(
    operator: DiscretizedOperator,
    localizer: DiscretizedOperator | SpatialProfile | None,
    z: complex,
    cutoff: float | None = None,
) -> complex:
    """``Tr(M_φ* A^{-z} M_φ)`` con la traza ponderada; ``cutoff`` descarta autovalores ``> Λ``."""

    return zeta_spectrum(operator, localizer, cutoff)(z)


def operator_zeta_samples(
    operator: DiscretizedOperator,
    localizer: DiscretizedOperator | SpatialProfile | None,
    order: float,
    z_values: Sequence[complex] | None = None,
    cutoff: float | str | None = "auto",
) -> ZetaSample:
    """Muestras de ``ζ_{A,φ}`` con una sola diagonalización."""

    spectrum = zeta_spectrum(operator, localizer)
    return spectrum_zeta_samples(
        spectrum, operator.grid.dim, order, z_values, cutoff, label=operator.label
    )


def spectrum_zeta_samples(
    spectrum: ZetaSpectrum,
    dim: int,
    order: float,
    z_values: Sequence[complex] | None = None,
    cutoff: float | str | None = "auto",
    label: str = "",
) -> ZetaSample:
    """Muestras de ``ζ`` a partir de un espectro ya calculado (denso o de multiplicador)."""

    pole = dim / order
    if cutoff == "auto":
        cutoff = auto_cutoff(spectrum.largest, order, dim)
    spectrum = ZetaSpectrum(spectrum.eigenvalues, spectrum.weights, cutoff)
    zs = list(z_values) if z_values is not None else default_z_values(pole)
    values = []
    for z in zs:
        value = spectrum(z)
        if abs(value.imag) > 1e-10 * max(abs(value), 1e-300) and complex(z).imag == 0:
            LOGGER.warning("ζ(%s) con parte imaginaria %.3e", z, value.imag)
        values.append(value)
    LOGGER.debug("ζ de '%s': %d muestras, Λ=%s", label, len(zs), cutoff)
    return ZetaSample(tuple(zs), tuple(values), pole, cutoff)


# ----------------------------------------------------------------------
# Extrapolación del residuo
# ----------------------------------------------------------------------
def extrapolate_residue(samples: ZetaSample, degree: int | None = None) -> FitResult:
    """Ajusta ``g(z) = (z - p)·ζ(z)`` y devuelve ``g(p)``.

    Sin corte espectral, ``g`` es un polinomio en ``z - p``. Con corte ``Λ`` el modelo es
    ``R·(1 - Λ^{-(z-p)}) + Σ_{k>=1} c_k (z-p)^k`` y se devuelve ``R``.
    """

    count = len(samples.z_values)
    if count < 4:
        raise RangeError(f"Se necesitan al menos 4 muestras (recibidas {count}).")
    offsets = np.array([complex(z) - samples.pole for z in samples.z_values])
    if np.any(offsets.real > FIT_WINDOW + 1e-12):
        raise RangeError(f"Todas las muestras deben cumplir Re z <= d/m + {FIT_WINDOW}.")
    g = offsets * np.array(samples.values, dtype=complex)
    degree = degree if degree is not None else min(3, count - 2)
    powers = [offsets**k for k in range(1, degree + 1)]
    if samples.cutoff is None:
        design = np.stack([np.ones_like(offsets)] + powers, axis=-1)
        model = f"poly{degree}"
    else:
        decay = 1.0 - np.exp(-offsets * math.log(samples.cutoff))
        design = np.stack([decay] + powers, axis=-1)
        model = f"cutoff+poly{degree}"
    scale = np.linalg.norm(design, axis=0)
    condition = float(np.linalg.cond(design / np.where(scale > 0, scale, 1.0)))
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise FitError(f"Ajuste mal condicionado (condición {condition:.3e} > {MAX_CONDITION:g}).")
    coefficients, *_ = np.linalg.lstsq(design, g, rcond=None)
    residual = float(np.max(np.abs(design @ coefficients - g)))
    LOGGER.debug("Residuo %s (modelo %s, residual %.3e)", coefficients[0], model, residual)
    return FitResult(complex(coefficients[0]), residual, condition, degree, model)


__all__ = [
    "FitResult",
    "ZetaSample",
    "ZetaSpectrum",
    "auto_cutoff",
    "default_z_values",
    "extrapolate_residue",
    "multiplier_zeta_spectrum",
    "operator_zeta",
    "operator_zeta_samples",
    "spectrum_zeta_samples",
    "residue_at_pole",
    "symbolic_zeta",
    "symbolic_zeta_samples",
    "zeta_spectrum",
]
