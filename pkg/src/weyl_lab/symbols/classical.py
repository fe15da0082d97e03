"""Símbolos clásicos matriciales: evaluación, composición y adjunto."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import qmc

from ..errors import ConfigurationError, DomainError, JetOrderError
from ..quadrature import Box, box_union, sphere_directions
from .components import (
    AdjointComponent,
    CompositionComponent,
    HomogeneousComponent,
    ScaledComponent,
    SumComponent,
    ZeroComponent,
    adjoint_requirement,
    composition_requirement,
)
from .cutoff import CUTOFF, CutoffSpec
from .jets import jet_cache

LOGGER = logging.getLogger("weyl_lab.symbols")

DEFAULT_TRUNCATION = 4
_DEGREE_TOL = 1e-12
TRACE_CONVENTIONS = ("standard",)


@dataclass(frozen=True)
class MatrixAlgebraSpec:
    """Álgebra ``M_n`` con la traza matricial sin normalizar (``τ(1_n) = n``)."""

    n: int = 1
    trace_convention: str = "standard"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigurationError(f"La dimensión interna debe ser >= 1 (recibido {self.n}).")
        if self.trace_convention not in TRACE_CONVENTIONS:
            raise ConfigurationError(f"Convención de traza desconocida: {self.trace_convention}.")

    def trace(self, a: np.ndarray) -> np.ndarray:
        return np.trace(np.asarray(a), axis1=-2, axis2=-1)

    def identity(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex)

    def check(self, matrix: np.ndarray, label: str = "") -> None:
        if np.shape(matrix)[-2:] != (self.n, self.n):
            where = f" de '{label}'" if label else ""
            raise ConfigurationError(
                f"Salida{where} de forma {np.shape(matrix)[-2:]} incompatible con n={self.n}."
            )


@dataclass(frozen=True, eq=False)
class ClassicalSymbol:
    """``σ ∼ Σ_j φ(ξ)·σ_{m-j}(x, ξ)`` truncado a ``len(components)`` términos."""

    order: complex
    components: tuple[HomogeneousComponent, ...]
    algebra: MatrixAlgebraSpec
    dim: int
    spatial_support: Box | None = None
    cutoff: CutoffSpec = CUTOFF
    name: str = ""
    _derived_support: Box | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.components:
            raise ConfigurationError("Un símbolo clásico necesita al menos una componente.")
        if self.dim < 1:
            raise ConfigurationError(f"Dimensión espacial inválida: {self.dim}.")
        object.__setattr__(self, "order", complex(self.order))
        for j, component in enumerate(self.components):
            expected = self.order - j
            if abs(complex(component.degree) - expected) > _DEGREE_TOL * (1 + abs(expected)):
                raise ConfigurationError(
                    f"La componente {j} de '{self.name}' tiene grado {component.degree}; "
                    f"se esperaba {expected}."
                )
            if component.size != self.algebra.n:
                raise ConfigurationError(
                    f"La componente {j} de '{self.name}' es {component.size}×{component.size}; "
                    f"el álgebra tiene n={self.algebra.n}."
                )
            if component.dim != self.dim:
                raise ConfigurationError(
                    f"La componente {j} vive en dimensión {component.dim}, no en {self.dim}."
                )
        derived = box_union([c.support for c in self.components if not c.is_zero])
        object.__setattr__(self, "_derived_support", derived)

    @property
    def truncation(self) -> int:
        return len(self.components)

    @property
    def principal(self) -> HomogeneousComponent:
        return self.components[0]

    @property
    def x_dependent(self) -> bool:
        return any(c.x_dependent for c in self.components)

    @property
    def support(self) -> Box | None:
        """Soporte espacial declarado o, en su defecto, el deducido de las componentes."""

        return self.spatial_support or self._derived_support

    @property
    def real_order(self) -> float:
        if abs(self.order.imag) > 0:
            raise DomainError(f"Se requiere orden real; '{self.name}' tiene orden {self.order}.")
        return float(self.order.real)

    def truncated(self, count: int) -> ClassicalSymbol:
        """Primeras ``count`` componentes, completando con ceros si faltan."""

        padded = list(self.components[:count])
        for j in range(len(padded), count):
            padded.append(ZeroComponent(self.order - j, self.dim, self.algebra.n))
        return replace(self, components=tuple(padded))

    def scaled(self, factor: complex) -> ClassicalSymbol:
        return replace(
            self, components=tuple(ScaledComponent(c, complex(factor)) for c in self.components)
        )

    def __call__(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return evaluate_symbol(self, x, xi)

    def class_constant(self, samples: int = 64, radii: Sequence[float] = (0.75, 1, 4, 32)) -> float:
        """Constante ``C`` de ``‖σ(x,ξ)‖ <= C(1+|ξ|²)^{Re m/2}`` sobre una malla de muestra."""

        x = sample_space_points(self, samples)
        directions = sphere_directions(self.dim, max(samples // 4, 2))
        worst = 0.0
        for radius in radii:
            xi = radius * directions
            values = evaluate_symbol(self, x[:, None, :], xi[None, :, :])
            norms = np.linalg.norm(values, ord=2, axis=(-2, -1))
            weight = (1.0 + radius**2) ** (self.order.real / 2.0)
            worst = max(worst, float(np.max(norms)) / weight)
        return worst


def sample_space_points(symbol: ClassicalSymbol, count: int, seed: int = 0) -> np.ndarray:
    """Puntos espaciales de muestra dentro del soporte (o de ``[-1, 1]^d``)."""

    box = symbol.support or Box.cube(symbol.dim, 1.0)
    unit = qmc.Halton(d=symbol.dim, scramble=True, seed=seed).random(count)
    return np.asarray(box.lower) + unit * box.widths


def evaluate_symbol(symbol: ClassicalSymbol, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``Σ_j φ(ξ)·σ_{m-j}(x, ξ)``; matriz nula donde ``|ξ| <= 1/2``."""

    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    batch = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
    xi = np.broadcast_to(xi, batch + (symbol.dim,))
    radius = np.linalg.norm(xi, axis=-1)
    live = radius > symbol.cutoff.inner
    safe = np.where(live[..., None], xi, 0.0)
    safe[..., 0] = np.where(live, safe[..., 0], 1.0)
    total = np.zeros(batch + (symbol.algebra.n, symbol.algebra.n), dtype=complex)
    with jet_cache():
        for component in symbol.components:
            if component.is_zero:
                continue
            values = component.value(x, safe)
            symbol.algebra.check(values, component.describe())
            total = total + values
    weight = np.where(live, symbol.cutoff(xi), 0.0)
    return total * weight[..., None, None]


def _compatible(first: ClassicalSymbol, second: ClassicalSymbol) -> None:
    if first.dim != second.dim:
        raise ConfigurationError(f"Dimensiones distintas: {first.dim} y {second.dim}.")
    if first.algebra != second.algebra:
        raise ConfigurationError(f"Álgebras distintas: {first.algebra} y {second.algebra}.")


def compose_symbols(
    b: ClassicalSymbol, a: ClassicalSymbol, truncation: int = DEFAULT_TRUNCATION
) -> ClassicalSymbol:
    """Símbolo de ``Op(b)∘Op(a)`` por la fórmula de Leibniz, hasta ``truncation`` grados."""

    _compatible(b, a)
    left = b.truncated(truncation).components
    right = a.truncated(truncation).components
    components = []
    for level in range(truncation):
        missing = composition_requirement(left, right, level)
        if missing is not None:
            required, available, label = missing
            raise JetOrderError(required, available if available is not None else 0, label)
        components.append(
            CompositionComponent(left, right, level, label=f"({b.name}∘{a.name})_{level}")
        )
    supports = [s for s in (b.support, a.support) if s is not None]
    support = supports[0].intersect(supports[1]) if len(supports) == 2 else (
        supports[0] if supports else None
    )
    LOGGER.debug("Composición %s∘%s con %d grados", b.name, a.name, truncation)
    return ClassicalSymbol(
        order=b.order + a.order,
        components=tuple(components),
        algebra=a.algebra,
        dim=a.dim,
        spatial_support=support,
        cutoff=a.cutoff,
        name=f"{b.name}∘{a.name}",
    )


def adjoint_symbol(a: ClassicalSymbol, truncation: int = DEFAULT_TRUNCATION) -> ClassicalSymbol:
    """Símbolo del adjunto formal respecto del producto ``L²``."""

    source = a.truncated(truncation).components
    components = []
    for level in range(truncation):
        missing = adjoint_requirement(source, level)
        if missing is not None:
            required, available, label = missing
            raise JetOrderError(required, available if available is not None else 0, label)
        components.append(AdjointComponent(source, level, label=f"{a.name}*_{level}"))
    return ClassicalSymbol(
        order=a.order.conjugate(),
        components=tuple(components),
        algebra=a.algebra,
        dim=a.dim,
        spatial_support=a.spatial_support,
        cutoff=a.cutoff,
        name=f"{a.name}*",
    )


def add_symbols(first: ClassicalSymbol, second: ClassicalSymbol) -> ClassicalSymbol:
    """Suma de dos símbolos cuyos órdenes difieren en un entero."""

    _compatible(first, second)
    shift = first.order - second.order
    if abs(shift.imag) > 0 or abs(shift.real - round(shift.real)) > _DEGREE_TOL:
        raise ConfigurationError("Solo se suman símbolos cuyos órdenes difieren en un entero.")
    high, low = (first, second) if shift.real >= 0 else (second, first)
    offset = int(round(abs(shift.real)))
    count = max(high.truncation, low.truncation + offset)
    high_parts = high.truncated(count).components
    low_parts = low.truncated(count - offset).components
    components = []
    for j in range(count):
        if j < offset:
            components.append(high_parts[j])
        else:
            components.append(SumComponent((high_parts[j], low_parts[j - offset])))
    support = box_union([first.support, second.support])
    return ClassicalSymbol(
        order=high.order,
        components=tuple(components),
        algebra=first.algebra,
        dim=first.dim,
        spatial_support=support,
        cutoff=first.cutoff,
        name=f"{first.name}+{second.name}",
    )


def sample_components(
    symbol: ClassicalSymbol, x: np.ndarray, u: np.ndarray
) -> list[np.ndarray]:
    """Valores de cada componente en ``(x, u)``."""

    with jet_cache():
        return [component.value(x, u) for component in symbol.components]


def component_residuals(
    symbol: ClassicalSymbol,
    x: np.ndarray,
    u: np.ndarray,
    target: Sequence[np.ndarray | None] | None = None,
) -> list[float]:
    """Máximo error entrada a entrada de cada componente frente a ``target`` (0 por defecto)."""

    values = sample_components(symbol, x, u)
    residuals = []
    for j, value in enumerate(values):
        reference = None if target is None or j >= len(target) else target[j]
        diff = value if reference is None else value - reference
        residuals.append(float(np.max(np.abs(diff))) if diff.size else 0.0)
    return residuals


__all__ = [
    "ClassicalSymbol",
    "DEFAULT_TRUNCATION",
    "MatrixAlgebraSpec",
    "add_symbols",
    "adjoint_symbol",
    "component_residuals",
    "compose_symbols",
    "evaluate_symbol",
    "sample_components",
    "sample_space_points",
]
