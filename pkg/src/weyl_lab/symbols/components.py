"""Componentes homogéneas ``σ_{m-j}(x, ξ)`` y los términos de Leibniz del cálculo.

Cada componente entrega jets en las variables ``(ξ, x)``; la composición, el adjunto,
la parametriz y el resolvente se expresan como componentes que combinan los jets de
otras. Las evaluaciones anidadas comparten una caché por llamada (:func:`jet_cache`).
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ConfigurationError, JetOrderError
from ..quadrature import Box, box_union
from .fields import Field, as_field, split_variables
from .jets import (
    Jet,
    MultiIndex,
    cached_jet,
    jet_cache,
    multi_factorial,
    multi_index_table,
    multi_indices,
    zero_jet,
)

LOGGER = logging.getLogger("weyl_lab.symbols")

_EPS = float(np.finfo(float).eps)


def _batch_shape(x: np.ndarray, xi: np.ndarray) -> tuple[int, ...]:
    return np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])


def _min_order(*orders: int | None) -> int | None:
    finite = [o for o in orders if o is not None]
    return min(finite) if finite else None


def leibniz_terms(dim: int, level: int) -> Iterator[tuple[MultiIndex, int, int]]:
    """Tríos ``(α, k, l)`` con ``|α| + k + l = level``."""

    for size in range(level + 1):
        for alpha in multi_indices(dim, size):
            for k in range(level - size + 1):
                yield alpha, k, level - size - k


class HomogeneousComponent(ABC):
    """Función ``σ(x, ξ)`` positivamente homogénea de grado ``degree`` en ``ξ ≠ 0``."""

    degree: complex
    dim: int
    size: int
    label: str

    @abstractmethod
    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        """Jet de orden ``order`` en el lote común de ``x`` y ``ξ``."""

    @property
    def jet_order(self) -> int | None:
        """Orden máximo de jet disponible (``None``: sin límite)."""

        return None

    @property
    def x_dependent(self) -> bool:
        return True

    @property
    def support(self) -> Box | None:
        return None

    @property
    def is_zero(self) -> bool:
        return False

    def jet(self, x: np.ndarray, xi: np.ndarray, order: int = 0) -> Jet:
        available = self.jet_order
        if available is not None and order > available:
            raise JetOrderError(order, available, self.label or type(self).__name__)
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if x.shape[-1] != self.dim or xi.shape[-1] != self.dim:
            raise ConfigurationError(
                f"Puntos de dimensión {x.shape[-1]}/{xi.shape[-1]}; se esperaba {self.dim}."
            )
        with jet_cache():
            return cached_jet(self, order, (x, xi), lambda: self._build_jet(x, xi, order))

    def value(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Valor ``(*lote, n, n)`` de la extensión homogénea en ``ξ``."""

        return self.jet(x, xi, 0).value

    __call__ = value

    def eval(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Valor sobre la esfera unidad (``u`` con ``|u| = 1``)."""

        return self.value(x, u)

    def derivative(
        self, x: np.ndarray, xi: np.ndarray, alpha: Sequence[int], beta: Sequence[int]
    ) -> np.ndarray:
        """``∂_ξ^α ∂_x^β σ(x, ξ)``."""

        order = int(sum(alpha) + sum(beta))
        return self.jet(x, xi, order).partial(tuple(alpha) + tuple(beta))

    def euler_defect(self, x: np.ndarray, xi: np.ndarray) -> float:
        """Máximo de ``|ξ·∇_ξσ - degree·σ| / |σ|`` sobre el lote."""

        jet = self.jet(x, xi, 1)
        xi_arr = np.broadcast_to(np.asarray(xi, dtype=float), jet.batch_shape + (self.dim,))
        radial = np.zeros_like(jet.value)
        for axis in range(self.dim):
            unit = [0] * (2 * self.dim)
            unit[axis] = 1
            radial = radial + xi_arr[..., axis, None, None] * jet.partial(unit)
        defect = np.linalg.norm(radial - self.degree * jet.value, axis=(-2, -1))
        scale = np.maximum(np.linalg.norm(jet.value, axis=(-2, -1)), 1e-300)
        return float(np.max(defect / scale))

    def describe(self) -> str:
        return self.label or type(self).__name__


# ----------------------------------------------------------------------
# Componentes básicas
# ----------------------------------------------------------------------
def _matrix_tuple(matrix: Any) -> tuple[tuple[complex, ...], ...]:
    array = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return tuple(tuple(complex(v) for v in row) for row in array)


@dataclass(frozen=True, eq=False)
class AnalyticComponent(HomogeneousComponent):
    """``Σ_i f_i(x, ξ)·M_i`` con campos analíticos ``f_i`` y matrices constantes ``M_i``.

    El grado declarado debe coincidir con la homogeneidad de los campos; la
    identidad de Euler lo verifica en las pruebas.
    """

    degree: complex
    dim: int
    terms: tuple[tuple[Field, tuple[tuple[complex, ...], ...]], ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.terms:
            raise ConfigurationError("Una componente analítica necesita al menos un término.")
        sizes = {len(matrix) for _, matrix in self.terms}
        if len(sizes) != 1:
            raise ConfigurationError("Los términos de una componente deben compartir tamaño.")

    @classmethod
    def scalar(
        cls, field: Any, degree: complex, dim: int, matrix: Any = None, label: str = ""
    ) -> AnalyticComponent:
        matrix = np.eye(1) if matrix is None else matrix
        return cls(complex(degree), dim, ((as_field(field), _matrix_tuple(matrix)),), label)

    @classmethod
    def from_terms(
        cls, degree: complex, dim: int, terms: Sequence[tuple[Any, Any]], label: str = ""
    ) -> AnalyticComponent:
        packed = tuple((as_field(f), _matrix_tuple(m)) for f, m in terms)
        return cls(complex(degree), dim, packed, label)

    @property
    def size(self) -> int:
        return len(self.terms[0][1])

    @property
    def x_dependent(self) -> bool:
        return any(field.depends_on_x for field, _ in self.terms)

    @property
    def support(self) -> Box | None:
        return box_union([field.support for field, _ in self.terms])

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        xi_vars, x_vars = split_variables(x, xi, order)
        total = None
        for field, matrix in self.terms:
            term = field.build(xi_vars, x_vars).times_matrix(np.array(matrix, dtype=complex))
            total = term if total is None else total + term
        return total


@dataclass(frozen=True, eq=False)
class ZeroComponent(HomogeneousComponent):
    degree: complex
    dim: int
    size: int
    label: str = "0"

    @property
    def x_dependent(self) -> bool:
        return False

    @property
    def is_zero(self) -> bool:
        return True

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        return zero_jet(2 * self.dim, order, _batch_shape(x, xi), self.size)


@dataclass(frozen=True, eq=False)
class ScaledComponent(HomogeneousComponent):
    base: HomogeneousComponent
    factor: complex
    label: str = ""

    @property
    def degree(self) -> complex:
        return self.base.degree

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def size(self) -> int:
        return self.base.size

    @property
    def jet_order(self) -> int | None:
        return self.base.jet_order

    @property
    def x_dependent(self) -> bool:
        return self.base.x_dependent

    @property
    def support(self) -> Box | None:
        return self.base.support

    @property
    def is_zero(self) -> bool:
        return self.base.is_zero or self.factor == 0

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        return self.base.jet(x, xi, order) * self.factor


@dataclass(frozen=True, eq=False)
class SumComponent(HomogeneousComponent):
    parts: tuple[HomogeneousComponent, ...]
    label: str = ""

    def __post_init__(self) -> None:
        degrees = {complex(p.degree) for p in self.parts}
        if len(degrees) != 1:
            raise ConfigurationError(f"Suma de componentes con grados distintos: {degrees}.")

    @property
    def degree(self) -> complex:
        return self.parts[0].degree

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    @property
    def size(self) -> int:
        return self.parts[0].size

    @property
    def jet_order(self) -> int | None:
        return _min_order(*(p.jet_order for p in self.parts))

    @property
    def x_dependent(self) -> bool:
        return any(p.x_dependent for p in self.parts)

    @property
    def support(self) -> Box | None:
        return box_union([p.support for p in self.parts if not p.is_zero])

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.parts)

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        total = self.parts[0].jet(x, xi, order)
        for part in self.parts[1:]:
            total = total + part.jet(x, xi, order)
        return total


@dataclass(frozen=True, eq=False)
class FiniteDifferenceComponent(HomogeneousComponent):
    """Extensión ``|ξ|^degree·f(x, ξ/|ξ|)`` de una función dada solo por valores.

    Los jets (hasta orden 2) se obtienen por diferencias centradas con paso
    ``ε^{1/3}(1+|arg|)`` para primeras derivadas y ``ε^{1/4}(1+|arg|)`` para segundas.
    """

    degree: complex
    dim: int
    size: int
    function: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = ""
    depends_on_x: bool = True
    spatial_support: Box | None = None

    @property
    def jet_order(self) -> int | None:
        return 2

    @property
    def x_dependent(self) -> bool:
        return self.depends_on_x

    @property
    def support(self) -> Box | None:
        return self.spatial_support

    def _extension(self, point: np.ndarray) -> np.ndarray:
        xi = point[..., : self.dim]
        x = point[..., self.dim :]
        radius = np.linalg.norm(xi, axis=-1)
        values = np.asarray(self.function(x, xi / radius[..., None]), dtype=complex)
        if values.shape[-2:] != (self.size, self.size):
            raise ConfigurationError(
                f"La función de '{self.describe()}' devuelve {values.shape[-2:]}, "
                f"se esperaba {(self.size, self.size)}."
            )
        return np.power(radius.astype(complex), self.degree)[..., None, None] * values

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        batch = _batch_shape(x, xi)
        point = np.concatenate(
            [np.broadcast_to(xi, batch + (self.dim,)), np.broadcast_to(x, batch + (self.dim,))],
            axis=-1,
        )
        nvars = 2 * self.dim
        table = multi_index_table(nvars, order)
        coeffs = np.zeros((table.size,) + batch + (self.size, self.size), dtype=complex)
        center = self._extension(point)
        coeffs[0] = center

        def shifted(steps: dict[int, np.ndarray]) -> np.ndarray:
            moved = point.copy()
            for var, step in steps.items():
                moved[..., var] += step
            return self._extension(moved)

        def unit(*vars_: int) -> tuple[int, ...]:
            alpha = [0] * nvars
            for var in vars_:
                alpha[var] += 1
            return tuple(alpha)

        if order >= 1:
            for var in range(nvars):
                h = _EPS ** (1.0 / 3.0) * (1.0 + np.abs(point[..., var]))
                diff = shifted({var: h}) - shifted({var: -h})
                coeffs[table.index[unit(var)]] = diff / (2.0 * h)[..., None, None]
        if order >= 2:
            steps = _EPS**0.25 * (1.0 + np.abs(point))
            for var in range(nvars):
                h = steps[..., var]
                second = shifted({var: h}) - 2.0 * center + shifted({var: -h})
                coeffs[table.index[unit(var, var)]] = second / (2.0 * h * h)[..., None, None]
            for a in range(nvars):
                for b in range(a + 1, nvars):
                    ha, hb = steps[..., a], steps[..., b]
                    mixed = (
                        shifted({a: ha, b: hb})
                        - shifted({a: ha, b: -hb})
                        - shifted({a: -ha, b: hb})
                        + shifted({a: -ha, b: -hb})
                    )
                    coeffs[table.index[unit(a, b)]] = mixed / (4.0 * ha * hb)[..., None, None]
        return Jet(coeffs, table)


# ----------------------------------------------------------------------
# Términos de Leibniz
# ----------------------------------------------------------------------
def composition_requirement(
    left: Sequence[HomogeneousComponent], right: Sequence[HomogeneousComponent], level: int
) -> tuple[int, int | None, str] | None:
    """Primer término cuyo jet falta: ``(orden requerido, disponible, etiqueta)``."""

    dim = left[0].dim
    for alpha, k, l in leibniz_terms(dim, level):
        size = sum(alpha)
        b, a = left[k], right[l]
        if size == 0 or b.is_zero or a.is_zero or not a.x_dependent:
            continue
        for part in (b, a):
            if part.jet_order is not None and part.jet_order < size:
                return size, part.jet_order, part.describe()
    return None


@dataclass(frozen=True, eq=False)
class CompositionComponent(HomogeneousComponent):
    """Grado ``m₁+m₂-j`` de ``b∘a``: ``Σ_{|α|+k+l=j} (1/α!) ∂_ξ^α b_{m₂-k} · D_x^α a_{m₁-l}``."""

    left: tuple[HomogeneousComponent, ...]
    right: tuple[HomogeneousComponent, ...]
    level: int
    label: str = ""

    @property
    def degree(self) -> complex:
        return self.left[0].degree + self.right[0].degree - self.level

    @property
    def dim(self) -> int:
        return self.left[0].dim

    @property
    def size(self) -> int:
        return self.left[0].size

    def _terms(self) -> Iterator[tuple[MultiIndex, HomogeneousComponent, HomogeneousComponent]]:
        for alpha, k, l in leibniz_terms(self.dim, self.level):
            b, a = self.left[k], self.right[l]
            if b.is_zero or a.is_zero:
                continue
            if sum(alpha) and not a.x_dependent:
                continue
            yield alpha, b, a

    @property
    def jet_order(self) -> int | None:
        orders = []
        for alpha, b, a in self._terms():
            size = sum(alpha)
            for part in (b, a):
                if part.jet_order is not None:
                    orders.append(part.jet_order - size)
        return _min_order(*orders)

    @property
    def x_dependent(self) -> bool:
        return any(a.x_dependent or b.x_dependent for _, b, a in self._terms())

    @property
    def is_zero(self) -> bool:
        return next(self._terms(), None) is None

    @property
    def support(self) -> Box | None:
        return box_union(
            [_product_support(b.support, a.support) for _, b, a in self._terms()]
        )

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        total = None
        for alpha, b, a in self._terms():
            size = sum(alpha)
            left = b.jet(x, xi, order + size).differentiate(alpha, 0)
            right = a.jet(x, xi, order + size).differentiate(alpha, self.dim)
            term = (left * right) * ((-1j) ** size / multi_factorial(alpha))
            total = term if total is None else total + term
        if total is None:
            return zero_jet(2 * self.dim, order, _batch_shape(x, xi), self.size)
        return total


def _product_support(first: Box | None, second: Box | None) -> Box | None:
    if first is None:
        return second
    if second is None:
        return first
    return first.intersect(second)


@dataclass(frozen=True, eq=False)
class AdjointComponent(HomogeneousComponent):
    """Grado ``m̄-j`` del adjunto: ``Σ_{|α|+k=j} (1/α!) ∂_ξ^α D_x^α (a_{m-k})*``."""

    source: tuple[HomogeneousComponent, ...]
    level: int
    label: str = ""

    @property
    def degree(self) -> complex:
        return complex(self.source[0].degree).conjugate() - self.level

    @property
    def dim(self) -> int:
        return self.source[0].dim

    @property
    def size(self) -> int:
        return self.source[0].size

    def _terms(self) -> Iterator[tuple[MultiIndex, HomogeneousComponent]]:
        for size in range(self.level + 1):
            part = self.source[self.level - size]
            if part.is_zero or (size and not part.x_dependent):
                continue
            for alpha in multi_indices(self.dim, size):
                yield alpha, part

    @property
    def jet_order(self) -> int | None:
        orders = [
            part.jet_order - 2 * sum(alpha)
            for alpha, part in self._terms()
            if part.jet_order is not None
        ]
        return _min_order(*orders)

    @property
    def x_dependent(self) -> bool:
        return any(part.x_dependent for _, part in self._terms())

    @property
    def is_zero(self) -> bool:
        return next(self._terms(), None) is None

    @property
    def support(self) -> Box | None:
        return box_union([part.support for _, part in self._terms()])

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        total = None
        for alpha, part in self._terms():
            size = sum(alpha)
            jet = part.jet(x, xi, order + 2 * size).conj_transpose()
            jet = jet.differentiate(alpha, 0).differentiate(alpha, self.dim)
            term = jet * ((-1j) ** size / multi_factorial(alpha))
            total = term if total is None else total + term
        if total is None:
            return zero_jet(2 * self.dim, order, _batch_shape(x, xi), self.size)
        return total


def adjoint_requirement(
    source: Sequence[HomogeneousComponent], level: int
) -> tuple[int, int | None, str] | None:
    for size in range(1, level + 1):
        part = source[level - size]
        if part.is_zero or not part.x_dependent:
            continue
        if part.jet_order is not None and part.jet_order < 2 * size:
            return 2 * size, part.jet_order, part.describe()
    return None


__all__ = [
    "AdjointComponent",
    "AnalyticComponent",
    "CompositionComponent",
    "FiniteDifferenceComponent",
    "HomogeneousComponent",
    "ScaledComponent",
    "SumComponent",
    "ZeroComponent",
    "adjoint_requirement",
    "composition_requirement",
    "leibniz_terms",
]
