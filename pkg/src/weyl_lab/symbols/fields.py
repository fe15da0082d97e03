"""Expresiones escalares en ``(ξ, x)`` con jets analíticos.

Los campos (:class:`Field`) son objetos inmutables y declarativos: se combinan con
``+``, ``*``, ``**`` y se evalúan construyendo jets sobre las variables coordenada.
Con ellos se montan las componentes homogéneas de las familias integradas, los
localizadores espaciales y las funciones sobre la esfera de los conmutadores.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ConfigurationError
from ..quadrature import Box, box_intersection, box_rule, box_union
from .jets import Jet

# Por debajo de este argumento h(t) = exp(-1/t) es menor que e^{-200} junto con sus
# derivadas de orden moderado, y se sustituye por cero.
_H_THRESHOLD = 5e-3


def _replace_where(keep: np.ndarray, jet: Jet, fallback: float) -> Jet:
    """Jet igual a ``jet`` donde ``keep`` y a la constante ``fallback`` fuera."""

    constant = np.zeros_like(jet.coeffs)
    constant[0] = fallback
    mask = np.asarray(keep, dtype=bool)
    mask = mask.reshape(mask.shape + (1, 1))[None]
    return Jet(np.where(mask, jet.coeffs, constant), jet.table)


def _h_jet(t: Jet) -> Jet:
    keep = t.value[..., 0, 0].real > _H_THRESHOLD
    safe = _replace_where(keep, t, 1.0)
    return (-(safe.reciprocal())).exp().masked(keep)


class Field(ABC):
    """Función escalar de ``(ξ, x)``; ``build`` recibe los jets de las variables."""

    @abstractmethod
    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        """Devuelve el jet escalar ``1×1`` del campo."""

    @property
    def depends_on_x(self) -> bool:
        return False

    @property
    def depends_on_xi(self) -> bool:
        return False

    @property
    def support(self) -> Box | None:
        """Caja que contiene el soporte en ``x`` (``None`` si no es compacto)."""

        return None

    @property
    def smooth(self) -> bool:
        return True

    # ------------------------------------------------------------------
    # Álgebra
    # ------------------------------------------------------------------
    def __add__(self, other: Any) -> Field:
        return Sum(_flatten_sum((self, as_field(other))))

    def __radd__(self, other: Any) -> Field:
        return Sum(_flatten_sum((as_field(other), self)))

    def __sub__(self, other: Any) -> Field:
        return self + (-as_field(other))

    def __rsub__(self, other: Any) -> Field:
        return as_field(other) + (-self)

    def __neg__(self) -> Field:
        return Product((Constant(-1.0), self))

    def __mul__(self, other: Any) -> Field:
        return Product(_flatten_product((self, as_field(other))))

    def __rmul__(self, other: Any) -> Field:
        return Product(_flatten_product((as_field(other), self)))

    def __truediv__(self, other: Any) -> Field:
        if isinstance(other, Field):
            return self * Power(other, -1.0)
        return self * Constant(1.0 / complex(other))

    def __pow__(self, exponent: complex) -> Field:
        return Power(self, complex(exponent))


def as_field(value: Any) -> Field:
    if isinstance(value, Field):
        return value
    return Constant(complex(value))


def _flatten_sum(items: Sequence[Field]) -> tuple[Field, ...]:
    flat: list[Field] = []
    for item in items:
        flat.extend(item.terms if isinstance(item, Sum) else (item,))
    return tuple(flat)


def _flatten_product(items: Sequence[Field]) -> tuple[Field, ...]:
    flat: list[Field] = []
    for item in items:
        flat.extend(item.factors if isinstance(item, Product) else (item,))
    return tuple(flat)


def _template(xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
    if x:
        return x[0]
    if xi:
        return xi[0]
    raise ConfigurationError("Un campo necesita al menos una variable para evaluarse.")


# ----------------------------------------------------------------------
# Átomos
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Constant(Field):
    value: complex = 1.0

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        template = _template(xi, x)
        return Jet.constant(
            np.full(template.batch_shape + (1, 1), self.value, dtype=complex),
            template.nvars,
            template.order,
        )


@dataclass(frozen=True)
class Coordinate(Field):
    """Coordenada espacial ``x_axis``."""

    axis: int

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        if self.axis >= len(x):
            raise ConfigurationError(f"Coordenada x_{self.axis} fuera de la dimensión {len(x)}.")
        return x[self.axis]

    @property
    def depends_on_x(self) -> bool:
        return True


@dataclass(frozen=True)
class Frequency(Field):
    """Variable dual ``ξ_axis``."""

    axis: int

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        if self.axis >= len(xi):
            raise ConfigurationError(f"Frecuencia ξ_{self.axis} no disponible en este contexto.")
        return xi[self.axis]

    @property
    def depends_on_xi(self) -> bool:
        return True


@dataclass(frozen=True)
class FrequencyNorm(Field):
    """``|ξ|`` (ξ ≠ 0)."""

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        if not xi:
            raise ConfigurationError("|ξ| requiere variables de frecuencia.")
        square = xi[0] * xi[0]
        for component in xi[1:]:
            square = square + component * component
        return square.power(0.5)

    @property
    def depends_on_xi(self) -> bool:
        return True


def direction(axis: int) -> Field:
    """Extensión homogénea de grado 0 de ``s ↦ s_axis``."""

    return Frequency(axis) * Power(FrequencyNorm(), -1.0)


def frequency_power(degree: complex) -> Field:
    return Power(FrequencyNorm(), complex(degree))


def _squared_distance(x: Sequence[Jet], center: Sequence[float], scale: float) -> Jet:
    if len(center) != len(x):
        raise ConfigurationError(
            f"Centro de dimensión {len(center)} en un espacio de dimensión {len(x)}."
        )
    total = None
    for coord, c in zip(x, center):
        shifted = (coord - float(c)) * (1.0 / scale)
        term = shifted * shifted
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class Bump(Field):
    """``e·exp(-1/(1-|x-c|²/R²))`` dentro de la bola de radio ``R``; pico 1 en el centro."""

    center: tuple[float, ...]
    radius: float = 1.0

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        rho2 = _squared_distance(x, self.center, self.radius)
        return _h_jet(1.0 - rho2) * math.e

    @property
    def depends_on_x(self) -> bool:
        return True

    @property
    def support(self) -> Box:
        return Box.cube(len(self.center), self.radius, tuple(self.center))


@dataclass(frozen=True)
class Plateau(Field):
    """Meseta suave: 1 en ``|x-c| <= inner``, 0 en ``|x-c| >= outer``."""

    center: tuple[float, ...]
    inner: float = 0.5
    outer: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.inner < self.outer:
            raise ConfigurationError("La meseta requiere 0 <= inner < outer.")

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        rho2 = _squared_distance(x, self.center, 1.0)
        s = (rho2 - self.inner**2) * (1.0 / (self.outer**2 - self.inner**2))
        rising = _h_jet(1.0 - s)
        falling = _h_jet(s)
        return rising * (rising + falling).reciprocal()

    @property
    def depends_on_x(self) -> bool:
        return True

    @property
    def support(self) -> Box:
        return Box.cube(len(self.center), self.outer, tuple(self.center))


@dataclass(frozen=True)
class Gaussian(Field):
    """``exp(-|x-c|²/(2w²))``; soporte numérico declarado en ``c ± 6w``."""

    center: tuple[float, ...]
    width: float = 1.0

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        rho2 = _squared_distance(x, self.center, self.width)
        return (rho2 * -0.5).exp()

    @property
    def depends_on_x(self) -> bool:
        return True

    @property
    def support(self) -> Box:
        return Box.cube(len(self.center), 6.0 * self.width, tuple(self.center))


@dataclass(frozen=True)
class Cosine(Field):
    """``cos(k·x + phase)``."""

    wave: tuple[float, ...]
    phase: float = 0.0

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        argument = None
        for coord, k in zip(x, self.wave):
            term = coord * float(k)
            argument = term if argument is None else argument + term
        argument = argument + self.phase
        forward = (argument * 1j).exp()
        backward = (argument * -1j).exp()
        return (forward + backward) * 0.5

    @property
    def depends_on_x(self) -> bool:
        return True


@dataclass(frozen=True)
class Indicator(Field):
    """Indicatriz de una caja cerrada; solo valores (sin derivadas)."""

    box: Box

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        template = _template(xi, x)
        coords = np.stack([c.value[..., 0, 0].real for c in x], axis=-1)
        inside = self.box.contains(coords).astype(complex)
        return Jet.constant(inside[..., None, None], template.nvars, template.order)

    @property
    def depends_on_x(self) -> bool:
        return True

    @property
    def support(self) -> Box:
        return self.box

    @property
    def smooth(self) -> bool:
        return False


@dataclass(frozen=True)
class Dilated(Field):
    """``f(x / scale)``."""

    base: Field
    scale: float

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        return self.base.build(xi, [coord * (1.0 / self.scale) for coord in x])

    @property
    def depends_on_x(self) -> bool:
        return self.base.depends_on_x

    @property
    def depends_on_xi(self) -> bool:
        return self.base.depends_on_xi

    @property
    def support(self) -> Box | None:
        box = self.base.support
        if box is None:
            return None
        return Box(
            tuple(self.scale * lo for lo in box.lower), tuple(self.scale * hi for hi in box.upper)
        )

    @property
    def smooth(self) -> bool:
        return self.base.smooth


# ----------------------------------------------------------------------
# Combinaciones
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Sum(Field):
    terms: tuple[Field, ...]

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        total = self.terms[0].build(xi, x)
        for term in self.terms[1:]:
            total = total + term.build(xi, x)
        return total

    @property
    def depends_on_x(self) -> bool:
        return any(t.depends_on_x for t in self.terms)

    @property
    def depends_on_xi(self) -> bool:
        return any(t.depends_on_xi for t in self.terms)

    @property
    def support(self) -> Box | None:
        return box_union([t.support for t in self.terms])

    @property
    def smooth(self) -> bool:
        return all(t.smooth for t in self.terms)


@dataclass(frozen=True)
class Product(Field):
    factors: tuple[Field, ...]

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        total = self.factors[0].build(xi, x)
        for factor in self.factors[1:]:
            total = total * factor.build(xi, x)
        return total

    @property
    def depends_on_x(self) -> bool:
        return any(f.depends_on_x for f in self.factors)

    @property
    def depends_on_xi(self) -> bool:
        return any(f.depends_on_xi for f in self.factors)

    @property
    def support(self) -> Box | None:
        supports = [f.support for f in self.factors if f.support is not None]
        return box_intersection(supports) if supports else None

    @property
    def smooth(self) -> bool:
        return all(f.smooth for f in self.factors)


@dataclass(frozen=True)
class Power(Field):
    base: Field
    exponent: complex

    def build(self, xi: Sequence[Jet], x: Sequence[Jet]) -> Jet:
        return self.base.build(xi, x).power(self.exponent)

    @property
    def depends_on_x(self) -> bool:
        return self.base.depends_on_x

    @property
    def depends_on_xi(self) -> bool:
        return self.base.depends_on_xi

    @property
    def support(self) -> Box | None:
        return self.base.support if self.exponent.real > 0 else None

    @property
    def smooth(self) -> bool:
        return self.base.smooth


# ----------------------------------------------------------------------
# Evaluación
# ----------------------------------------------------------------------
def split_variables(
    x: np.ndarray | None, xi: np.ndarray | None, order: int
) -> tuple[list[Jet], list[Jet]]:
    """Jets de las variables ``(ξ, x)`` sobre el lote común de ``x`` y ``ξ``."""

    parts = [np.asarray(p, dtype=float) for p in (xi, x) if p is not None]
    batch = np.broadcast_shapes(*[p.shape[:-1] for p in parts])
    parts = [np.broadcast_to(p, batch + p.shape[-1:]) for p in parts]
    variables = Jet.variables(np.concatenate(parts, axis=-1), order)
    n_xi = 0 if xi is None else np.shape(xi)[-1]
    return variables[:n_xi], variables[n_xi:]


def field_jet(field: Field, x: np.ndarray | None, xi: np.ndarray | None, order: int) -> Jet:
    """Jet escalar de ``field``; las variables son ``(ξ, x)`` en ese orden."""

    xi_vars, x_vars = split_variables(x, xi, order)
    return field.build(xi_vars, x_vars)


@dataclass(frozen=True)
class SpatialProfile:
    """Función matricial de ``x``: campo escalar por matriz constante.

    Sirve como localizador ``φ`` de las funciones zeta y del conteo microlocal, como
    función ``f`` de los conmutadores y como coeficiente de los operadores de
    multiplicación.
    """

    field: Field
    dim: int
    matrix: tuple[tuple[complex, ...], ...] = ((1.0,),)

    def __post_init__(self) -> None:
        if self.field.depends_on_xi:
            raise ConfigurationError("Un perfil espacial no puede depender de ξ.")
        rows = {len(row) for row in self.matrix}
        if rows != {len(self.matrix)}:
            raise ConfigurationError("La matriz del perfil debe ser cuadrada.")

    @classmethod
    def scalar(cls, field: Field, dim: int, n: int = 1) -> SpatialProfile:
        return cls.with_matrix(field, dim, np.eye(n))

    @classmethod
    def with_matrix(cls, field: Field, dim: int, matrix: np.ndarray) -> SpatialProfile:
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return cls(field, dim, tuple(tuple(complex(v) for v in row) for row in matrix))

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def matrix_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=complex)

    @property
    def support(self) -> Box | None:
        return self.field.support

    def values(self, x: np.ndarray) -> np.ndarray:
        """Valores ``(*lote, n, n)``."""

        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ConfigurationError(f"Puntos de dimensión {x.shape[-1]}; se esperaba {self.dim}.")
        scalar = field_jet(self.field, x, None, 0).value[..., 0, 0]
        return scalar[..., None, None] * self.matrix_array

    __call__ = values

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradiente ``(*lote, d, n, n)``."""

        if not self.field.smooth:
            raise ConfigurationError("El gradiente requiere un perfil suave (no indicatriz).")
        jet = field_jet(self.field, np.asarray(x, dtype=float), None, 1)
        grads = []
        for axis in range(self.dim):
            unit = [0] * self.dim
            unit[axis] = 1
            grads.append(jet.partial(unit)[..., 0, 0])
        scalar = np.stack(grads, axis=-1)
        return scalar[..., None, None] * self.matrix_array

    def scaled(self, factor: complex) -> SpatialProfile:
        return SpatialProfile(self.field * factor, self.dim, self.matrix)

    def dilated(self, scale: float) -> SpatialProfile:
        return SpatialProfile(Dilated(self.field, scale), self.dim, self.matrix)

    def trace_integral(self, power: float = 2.0, nodes: int = 48) -> float:
        """``∫ τ(|f(x)|^power) dx`` sobre el soporte."""

        if self.support is None:
            raise ConfigurationError("La integral requiere un perfil con soporte compacto.")
        points, weights = box_rule(self.support, nodes)
        singular = np.linalg.svd(self.values(points), compute_uv=False)
        return float(np.sum(weights * np.sum(singular**power, axis=-1)))


__all__ = [
    "Bump",
    "Constant",
    "Coordinate",
    "Cosine",
    "Dilated",
    "Field",
    "Frequency",
    "FrequencyNorm",
    "Gaussian",
    "Indicator",
    "Plateau",
    "Power",
    "Product",
    "SpatialProfile",
    "Sum",
    "as_field",
    "direction",
    "field_jet",
    "frequency_power",
    "split_variables",
]
