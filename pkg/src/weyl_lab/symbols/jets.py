"""Jets truncados multivariables con coeficientes matriciales.

Un :class:`Jet` guarda los coeficientes de Taylor de una función matricial en un punto
(o en un lote de puntos) hasta un grado total fijo. Las variables se ordenan como
``(ξ_1, …, ξ_d, x_1, …, x_d)``. La aritmética sigue la de una serie de potencias
truncada: producto de Cauchy, inversa por serie de Neumann sobre la parte nilpotente y
potencias escalares por la serie binomial alrededor del término constante.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterator, Mapping, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Any

import numpy as np

from ..errors import JetOrderError, SingularResolventError

MultiIndex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class MultiIndexTable:
    """Multi-índices de grado total ``<= order`` en orden graduado.

    El orden graduado hace que la tabla de orden ``J-1`` sea un prefijo de la de orden
    ``J``; truncar un jet es cortar el primer eje.
    """

    nvars: int
    order: int
    exponents: np.ndarray
    degrees: np.ndarray
    factorials: np.ndarray
    index: Mapping[MultiIndex, int]
    product_left: np.ndarray
    product_right: np.ndarray
    product_starts: np.ndarray
    derivative_sources: tuple[np.ndarray, ...]
    derivative_factors: tuple[np.ndarray, ...]

    @property
    def size(self) -> int:
        return len(self.exponents)

    def position(self, alpha: Sequence[int]) -> int:
        key = tuple(int(a) for a in alpha)
        try:
            return self.index[key]
        except KeyError as exc:
            raise JetOrderError(sum(key), self.order) from exc


def _graded_exponents(nvars: int, order: int) -> list[MultiIndex]:
    exponents: list[MultiIndex] = []
    for degree in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), degree):
            counts = [0] * nvars
            for var in combo:
                counts[var] += 1
            exponents.append(tuple(counts))
    return exponents


@lru_cache(maxsize=64)
def multi_index_table(nvars: int, order: int) -> MultiIndexTable:
    exponents = _graded_exponents(nvars, order)
    index = {alpha: pos for pos, alpha in enumerate(exponents)}
    degrees = np.array([sum(alpha) for alpha in exponents], dtype=int)
    factorials = np.array(
        [math.prod(math.factorial(a) for a in alpha) for alpha in exponents], dtype=float
    )

    triples: list[tuple[int, int, int]] = []
    for i, left in enumerate(exponents):
        for j, right in enumerate(exponents):
            if degrees[i] + degrees[j] > order:
                continue
            target = tuple(a + b for a, b in zip(left, right))
            triples.append((index[target], i, j))
    triples.sort()
    targets = np.array([t[0] for t in triples], dtype=int)
    left_idx = np.array([t[1] for t in triples], dtype=int)
    right_idx = np.array([t[2] for t in triples], dtype=int)
    starts = np.searchsorted(targets, np.arange(len(exponents)))

    sources: list[np.ndarray] = []
    factors: list[np.ndarray] = []
    lower = [alpha for alpha in exponents if sum(alpha) <= order - 1]
    for var in range(nvars):
        src = []
        fac = []
        for alpha in lower:
            shifted = list(alpha)
            shifted[var] += 1
            src.append(index[tuple(shifted)])
            fac.append(alpha[var] + 1)
        sources.append(np.array(src, dtype=int))
        factors.append(np.array(fac, dtype=float))

    return MultiIndexTable(
        nvars=nvars,
        order=order,
        exponents=np.array(exponents, dtype=int).reshape(len(exponents), nvars),
        degrees=degrees,
        factorials=factorials,
        index=MappingProxyType(index),
        product_left=left_idx,
        product_right=right_idx,
        product_starts=starts,
        derivative_sources=tuple(sources),
        derivative_factors=tuple(factors),
    )


def multi_indices(dim: int, total: int) -> Iterator[MultiIndex]:
    """Itera los multi-índices de ``dim`` componentes con suma ``total``."""

    for combo in itertools.combinations_with_replacement(range(dim), total):
        counts = [0] * dim
        for axis in combo:
            counts[axis] += 1
        yield tuple(counts)


def multi_factorial(alpha: Sequence[int]) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def _expand(arr: np.ndarray, ndim: int) -> np.ndarray:
    return arr.reshape(arr.shape + (1,) * (ndim - arr.ndim))


def _lift(coeffs: np.ndarray, ndim: int) -> np.ndarray:
    """Inserta ejes de lote unitarios justo detrás del eje de coeficientes.

    Los ejes de lote extra (p. ej. los nodos ``λ`` de un contorno) van siempre delante del
    lote original, nunca frente al eje de monomios.
    """

    missing = ndim - coeffs.ndim
    if missing <= 0:
        return coeffs
    return coeffs.reshape(coeffs.shape[:1] + (1,) * missing + coeffs.shape[1:])


class Jet:
    """Coeficientes de Taylor ``c_α`` con forma ``(ncoef, *batch, filas, columnas)``.

    ``a * b`` es el producto de Cauchy truncado: producto matricial cuando ambos factores
    son matrices y producto por escalar cuando uno de ellos es ``1×1``.
    """

    __slots__ = ("coeffs", "table")
    __array_priority__ = 1000

    def __init__(self, coeffs: np.ndarray, table: MultiIndexTable) -> None:
        if coeffs.ndim < 3 or coeffs.shape[0] != table.size:
            raise ValueError(
                f"Coeficientes con forma {coeffs.shape} incompatibles con {table.size} monomios."
            )
        self.coeffs = coeffs
        self.table = table

    # ------------------------------------------------------------------
    # Construcción
    # ------------------------------------------------------------------
    @classmethod
    def constant(cls, value: Any, nvars: int, order: int) -> Jet:
        value = np.asarray(value, dtype=complex)
        if value.ndim < 2:
            value = value.reshape(value.shape + (1, 1))
        table = multi_index_table(nvars, order)
        coeffs = np.zeros((table.size,) + value.shape, dtype=complex)
        coeffs[0] = value
        return cls(coeffs, table)

    @classmethod
    def variables(cls, point: np.ndarray, order: int) -> list[Jet]:
        """Jets de las funciones coordenada en ``point`` (forma ``(*batch, nvars)``)."""

        point = np.asarray(point, dtype=float)
        nvars = point.shape[-1]
        table = multi_index_table(nvars, order)
        batch = point.shape[:-1]
        result = []
        for var in range(nvars):
            coeffs = np.zeros((table.size,) + batch + (1, 1), dtype=complex)
            coeffs[0, ..., 0, 0] = point[..., var]
            if order >= 1:
                unit = [0] * nvars
                unit[var] = 1
                coeffs[table.index[tuple(unit)], ..., 0, 0] = 1.0
            result.append(cls(coeffs, table))
        return result

    # ------------------------------------------------------------------
    # Propiedades
    # ------------------------------------------------------------------
    @property
    def order(self) -> int:
        return self.table.order

    @property
    def nvars(self) -> int:
        return self.table.nvars

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def is_scalar(self) -> bool:
        return self.coeffs.shape[-2:] == (1, 1)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:-2]

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise JetOrderError(order, self.order)
        if order == self.order:
            return self
        table = multi_index_table(self.nvars, order)
        return Jet(self.coeffs[: table.size], table)

    def nilpotent(self) -> Jet:
        coeffs = self.coeffs.copy()
        coeffs[0] = 0.0
        return Jet(coeffs, self.table)

    def partial(self, alpha: Sequence[int]) -> np.ndarray:
        """Derivada parcial ``∂^α`` evaluada en el punto base."""

        if sum(alpha) > self.order:
            raise JetOrderError(sum(alpha), self.order)
        pos = self.table.position(alpha)
        return self.coeffs[pos] * self.table.factorials[pos]

    def derivative(self, var: int) -> Jet:
        """Jet de ``∂/∂v`` con un orden menos."""

        if self.order == 0:
            raise JetOrderError(1, 0)
        lower = multi_index_table(self.nvars, self.order - 1)
        src = self.table.derivative_sources[var]
        factor = _expand(self.table.derivative_factors[var], self.coeffs.ndim)
        return Jet(self.coeffs[src] * factor, lower)

    def differentiate(self, alpha: Sequence[int], offset: int = 0) -> Jet:
        jet = self
        for axis, count in enumerate(alpha):
            for _ in range(count):
                jet = jet.derivative(offset + axis)
        return jet

    # ------------------------------------------------------------------
    # Aritmética
    # ------------------------------------------------------------------
    def _aligned(self, other: Jet) -> tuple[np.ndarray, np.ndarray, MultiIndexTable]:
        if other.nvars != self.nvars:
            raise ValueError("Los jets combinados deben compartir variables.")
        order = min(self.order, other.order)
        left = self.truncate(order)
        right = other.truncate(order)
        ndim = max(left.coeffs.ndim, right.coeffs.ndim)
        return _lift(left.coeffs, ndim), _lift(right.coeffs, ndim), left.table

    def __add__(self, other: Any) -> Jet:
        if isinstance(other, Jet):
            left, right, table = self._aligned(other)
            if left.shape[-2:] != right.shape[-2:]:
                raise ValueError(
                    f"Tamaños matriciales incompatibles: {left.shape[-2:]} y {right.shape[-2:]}."
                )
            return Jet(left + right, table)
        shift = np.asarray(other, dtype=complex)
        rows, cols = self.coeffs.shape[-2:]
        base = self.coeffs[0] + _expand(shift, shift.ndim + 2) * np.eye(rows, cols)
        shape = (self.table.size,) + np.broadcast_shapes(self.coeffs.shape[1:], base.shape)
        coeffs = np.array(np.broadcast_to(_lift(self.coeffs, len(shape)), shape), dtype=complex)
        coeffs[0] = base
        return Jet(coeffs, self.table)

    __radd__ = __add__

    def __neg__(self) -> Jet:
        return Jet(-self.coeffs, self.table)

    def __sub__(self, other: Any) -> Jet:
        return self + (-other)

    def __rsub__(self, other: Any) -> Jet:
        return (-self) + other

    def __mul__(self, other: Any) -> Jet:
        if isinstance(other, Jet):
            return _cauchy(self, other)
        factor = np.asarray(other)
        expanded = _expand(factor, factor.ndim + 2)[None]
        return Jet(_lift(self.coeffs, expanded.ndim) * expanded, self.table)

    def __rmul__(self, other: Any) -> Jet:
        return self.__mul__(other)

    def __truediv__(self, other: Any) -> Jet:
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other: Any) -> Jet:
        return self.reciprocal() * other

    def __pow__(self, exponent: complex) -> Jet:
        return self.power(exponent)

    def times_matrix(self, matrix: np.ndarray) -> Jet:
        """Jet escalar por matriz constante."""

        if not self.is_scalar:
            raise ValueError("times_matrix requiere un jet escalar.")
        return Jet(self.coeffs * np.asarray(matrix, dtype=complex), self.table)

    def conj_transpose(self) -> Jet:
        return Jet(np.conj(np.swapaxes(self.coeffs, -1, -2)), self.table)

    def inverse(self) -> Jet:
        """Inversa matricial mediante Neumann sobre la parte nilpotente."""

        base = self.coeffs[0]
        try:
            base_inv = np.linalg.inv(base)
        except np.linalg.LinAlgError as exc:
            raise SingularResolventError("Término constante singular al invertir un jet.") from exc
        inv0 = Jet.constant(base_inv, self.nvars, self.order)
        step = -(inv0 * self.nilpotent())
        result = inv0
        term = inv0
        for _ in range(self.order):
            term = step * term
            result = result + term
        return result

    def reciprocal(self) -> Jet:
        if not self.is_scalar:
            return self.inverse()
        return self.power(-1.0)

    def power(self, exponent: complex) -> Jet:
        """``(c + N)^s = c^s Σ_k binom(s, k) (N/c)^k`` con rama principal."""

        if not self.is_scalar:
            raise ValueError("Solo se admiten potencias de jets escalares.")
        base = self.coeffs[0]
        if np.any(base == 0):
            raise SingularResolventError("Potencia de un jet con término constante nulo.")
        ratio = Jet(self.nilpotent().coeffs / base[None], self.table)
        result = Jet.constant(np.ones_like(base), self.nvars, self.order)
        term = result
        coefficient = 1.0 + 0.0j
        for k in range(1, self.order + 1):
            coefficient *= (exponent - (k - 1)) / k
            term = term * ratio
            result = result + term * coefficient
        return result * np.power(base[..., 0, 0].astype(complex), exponent)

    def exp(self) -> Jet:
        if not self.is_scalar:
            raise ValueError("Solo se admite la exponencial de jets escalares.")
        base = self.coeffs[0]
        nil = self.nilpotent()
        result = Jet.constant(np.ones_like(base), self.nvars, self.order)
        term = result
        for k in range(1, self.order + 1):
            term = term * nil * (1.0 / k)
            result = result + term
        return result * np.exp(base[..., 0, 0])

    def masked(self, keep: np.ndarray) -> Jet:
        """Anula todos los coeficientes en los puntos del lote donde ``keep`` es falso."""

        keep = np.asarray(keep, dtype=bool)
        return Jet(np.where(_expand(keep, keep.ndim + 2)[None], self.coeffs, 0.0), self.table)

    def __repr__(self) -> str:
        return (
            f"Jet(order={self.order}, nvars={self.nvars}, batch={self.batch_shape}, "
            f"matrix={self.coeffs.shape[-2:]})"
        )


def _cauchy(a: Jet, b: Jet) -> Jet:
    left, right, table = a._aligned(b)
    lhs = left[table.product_left]
    rhs = right[table.product_right]
    if lhs.shape[-2:] == (1, 1) or rhs.shape[-2:] == (1, 1):
        terms = lhs * rhs
    else:
        terms = lhs @ rhs
    coeffs = np.add.reduceat(terms, table.product_starts, axis=0)
    return Jet(coeffs, table)


def zero_jet(nvars: int, order: int, batch: tuple[int, ...], size: int) -> Jet:
    table = multi_index_table(nvars, order)
    return Jet(np.zeros((table.size,) + batch + (size, size), dtype=complex), table)


# ----------------------------------------------------------------------
# Caché por evaluación
# ----------------------------------------------------------------------
_JET_CACHE: ContextVar[dict[Any, Any] | None] = ContextVar("weyl_lab_jet_cache", default=None)


@contextmanager
def jet_cache() -> Iterator[dict[Any, Any]]:
    """Reutiliza jets de componentes dentro de una misma evaluación.

    Las recursiones (composición, parametriz, resolvente) piden los mismos jets muchas
    veces en los mismos puntos. Las claves usan la identidad de los arrays de entrada,
    que se guardan junto al resultado para que no se reciclen.
    """

    current = _JET_CACHE.get()
    if current is not None:
        yield current
        return
    store: dict[Any, Any] = {}
    token = _JET_CACHE.set(store)
    try:
        yield store
    finally:
        _JET_CACHE.reset(token)


def cached_jet(owner: object, order: int, anchors: tuple[Any, ...], factory: Callable[[], Jet]):
    store = _JET_CACHE.get()
    if store is None:
        return factory()
    key = (id(owner), order) + tuple(id(anchor) for anchor in anchors)
    hit = store.get(key)
    if hit is None:
        hit = (factory(), owner, anchors)
        store[key] = hit
    return hit[0]


__all__ = [
    "Jet",
    "MultiIndex",
    "MultiIndexTable",
    "cached_jet",
    "jet_cache",
    "multi_factorial",
    "multi_index_table",
    "multi_indices",
    "zero_jet",
]
