"""Familias integradas de símbolos y localizadores, y su construcción declarativa."""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from typing import Any

import numpy as np
from scipy import special

from ..errors import ConfigurationError
from ..quadrature import Box
from .classical import ClassicalSymbol, MatrixAlgebraSpec
from .components import AnalyticComponent, HomogeneousComponent, ZeroComponent
from .fields import (
    Bump,
    Constant,
    Coordinate,
    Cosine,
    Field,
    Frequency,
    Gaussian,
    Indicator,
    Plateau,
    SpatialProfile,
    direction,
    frequency_power,
)

LOGGER = logging.getLogger("weyl_lab.symbols")


def _as_matrix(matrix: Any, n: int | None = None) -> np.ndarray:
    if matrix is None:
        return np.eye(n or 1, dtype=complex)
    array = np.asarray(matrix, dtype=complex)
    if array.ndim == 1:
        array = np.diag(array)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ConfigurationError(f"Se esperaba una matriz cuadrada, recibido {array.shape}.")
    return array


def abs_power(
    order: float, dim: int, matrix: Any = None, profile: Field | None = None, name: str = ""
) -> ClassicalSymbol:
    """``|ξ|^order·M`` (multiplicado por ``profile(x)`` si se indica)."""

    mat = _as_matrix(matrix)
    field = frequency_power(order) if profile is None else frequency_power(order) * profile
    component = AnalyticComponent.scalar(field, order, dim, mat, label=name or f"|ξ|^{order}")
    return ClassicalSymbol(
        order=order,
        components=(component,),
        algebra=MatrixAlgebraSpec(mat.shape[0]),
        dim=dim,
        name=name or f"|ξ|^{order:g}",
    )


def classical_expansion_of_bessel(
    exponent: float, dim: int, truncation: int = 4, matrix: Any = None
) -> ClassicalSymbol:
    """Expansión ``(1+|ξ|²)^{s/2} ∼ Σ_k binom(s/2, k)·|ξ|^{s-2k}``."""

    mat = _as_matrix(matrix)
    components: list[HomogeneousComponent] = []
    for j in range(truncation):
        degree = exponent - j
        if j % 2:
            components.append(ZeroComponent(degree, dim, mat.shape[0]))
            continue
        coefficient = special.binom(exponent / 2.0, j // 2)
        components.append(
            AnalyticComponent.scalar(
                frequency_power(degree) * float(coefficient), degree, dim, mat, label=f"J_{j}"
            )
        )
    return ClassicalSymbol(
        order=exponent,
        components=tuple(components),
        algebra=MatrixAlgebraSpec(mat.shape[0]),
        dim=dim,
        name=f"J^{exponent:g}",
    )


def multiplication_symbol(profile: SpatialProfile, name: str = "M_f") -> ClassicalSymbol:
    """Símbolo de orden 0 de ``M_f``: ``f(x)``."""

    component = AnalyticComponent.scalar(
        profile.field, 0.0, profile.dim, profile.matrix_array, label=name
    )
    return ClassicalSymbol(
        order=0.0,
        components=(component,),
        algebra=MatrixAlgebraSpec(profile.n),
        dim=profile.dim,
        spatial_support=profile.support,
        name=name,
    )


def frequency_symbol(axis: int, dim: int) -> ClassicalSymbol:
    """Multiplicador ``ξ_axis``."""

    component = AnalyticComponent.scalar(Frequency(axis), 1.0, dim, label=f"ξ_{axis}")
    return ClassicalSymbol(1.0, (component,), MatrixAlgebraSpec(1), dim, name=f"ξ_{axis}")


def x_times_xi(dim: int = 1, axis: int = 0) -> ClassicalSymbol:
    """``x_axis·ξ_axis``."""

    field = Coordinate(axis) * Frequency(axis)
    component = AnalyticComponent.scalar(field, 1.0, dim, label="xξ")
    return ClassicalSymbol(1.0, (component,), MatrixAlgebraSpec(1), dim, name="xξ")


def coefficient_abs_power(coefficient: Field, order: float, dim: int) -> ClassicalSymbol:
    """``a(x)·|ξ|^order`` escalar."""

    component = AnalyticComponent.scalar(
        coefficient * frequency_power(order), order, dim, label="a|ξ|"
    )
    return ClassicalSymbol(order, (component,), MatrixAlgebraSpec(1), dim, name="a|ξ|^m")


def sphere_harmonic(coefficients: Mapping[tuple[int, ...], complex], dim: int) -> Field:
    """Polinomio en las direcciones ``s_j = ξ_j/|ξ|`` (homogéneo de grado 0)."""

    total: Field | None = None
    for powers, coefficient in coefficients.items():
        term: Field = Constant(complex(coefficient))
        for axis, power in enumerate(powers):
            for _ in range(int(power)):
                term = term * direction(axis)
        total = term if total is None else total + term
    if total is None:
        raise ConfigurationError("El armónico esférico necesita al menos un coeficiente.")
    return total


def random_elliptic(
    dim: int,
    n: int = 2,
    order: float = 1.0,
    seed: int = 0,
    support_radius: float = 1.0,
    modulation: Field | None = None,
) -> ClassicalSymbol:
    """Símbolo elíptico aleatorio con parte principal hermítica definida positiva.

    ``σ_m = |ξ|^m(P₀ + b(x)·H + s₀²·K)`` con ``P₀ = GG* + I``, ``‖H‖ <= 0.3``, ``K >= 0``
    y un término de grado ``m-1`` complejo modulado por el mismo ``b``. Por defecto ``b`` es
    un bump de radio ``support_radius``; ``modulation`` lo sustituye por cualquier campo con
    ``|b| <= 1``.
    """

    rng = np.random.default_rng(seed)

    def gaussian_matrix() -> np.ndarray:
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))

    g = gaussian_matrix() / np.sqrt(2 * n)
    p0 = g @ g.conj().T + np.eye(n)
    h = gaussian_matrix()
    h = h + h.conj().T
    h *= 0.3 / np.linalg.norm(h, ord=2)
    k = gaussian_matrix() / np.sqrt(4 * n)
    k = k @ k.conj().T
    lower = 0.5 * gaussian_matrix()

    envelope = modulation if modulation is not None else Bump(tuple([0.0] * dim), support_radius)
    top = frequency_power(order)
    angular = direction(0) * direction(0)
    principal = AnalyticComponent.from_terms(
        order, dim, [(top, p0), (top * envelope, h), (top * angular, k)], label="σ_m"
    )
    subprincipal = AnalyticComponent.from_terms(
        order - 1, dim, [(frequency_power(order - 1) * envelope, lower)], label="σ_{m-1}"
    )
    return ClassicalSymbol(
        order=order,
        components=(principal, subprincipal),
        algebra=MatrixAlgebraSpec(n),
        dim=dim,
        name=f"elliptic[{seed}]",
    )


# ----------------------------------------------------------------------
# Construcción declarativa
# ----------------------------------------------------------------------
def _center(descriptor: Mapping[str, Any], dim: int) -> tuple[float, ...]:
    center = tuple(float(c) for c in descriptor.get("center", [0.0] * dim))
    if len(center) != dim:
        raise ConfigurationError(f"El centro {center} no tiene dimensión {dim}.")
    return center


def build_field(descriptor: Mapping[str, Any], dim: int) -> Field:
    """Campo espacial descrito por ``{"kind": ..., parámetros}``."""

    kind = descriptor.get("kind", "bump")
    if kind == "bump":
        return Bump(_center(descriptor, dim), float(descriptor.get("radius", 1.0)))
    if kind == "gaussian":
        return Gaussian(_center(descriptor, dim), float(descriptor.get("width", 0.25)))
    if kind == "plateau":
        return Plateau(
            _center(descriptor, dim),
            float(descriptor.get("inner", 0.5)),
            float(descriptor.get("outer", 1.0)),
        )
    if kind == "indicator":
        half = float(descriptor.get("radius", 1.0))
        return Indicator(Box.cube(dim, half, _center(descriptor, dim)))
    if kind == "constant":
        return Constant(complex(descriptor.get("value", 1.0)))
    if kind == "wave":
        wave = tuple(float(k) for k in descriptor.get("wave", [1.0] * dim))
        return Cosine(wave, float(descriptor.get("phase", 0.0)))
    if kind == "cosine":
        wave = tuple(float(k) for k in descriptor.get("wave", [1.0] * dim))
        envelope = Bump(_center(descriptor, dim), float(descriptor.get("radius", 1.0)))
        return Cosine(wave, float(descriptor.get("phase", 0.0))) * envelope
    raise ConfigurationError(f"Tipo de perfil desconocido: '{kind}'.")


def build_profile(descriptor: Mapping[str, Any], dim: int, n: int = 1) -> SpatialProfile:
    """Localizador ``campo × matriz`` a partir de su descripción."""

    matrix = _as_matrix(descriptor.get("matrix"), n)
    scale = complex(descriptor.get("scale", 1.0))
    field = build_field(descriptor, dim)
    if scale != 1.0:
        field = field * scale
    return SpatialProfile.with_matrix(field, dim, matrix)


def _build_abs_power(descriptor: Mapping[str, Any], dim: int) -> ClassicalSymbol:
    return abs_power(float(descriptor.get("order", 1.0)), dim, descriptor.get("matrix"))


def _build_bessel(descriptor: Mapping[str, Any], dim: int) -> ClassicalSymbol:
    return classical_expansion_of_bessel(
        float(descriptor.get("order", 1.0)),
        dim,
        int(descriptor.get("truncation", 4)),
        descriptor.get("matrix"),
    )


def _build_random(descriptor: Mapping[str, Any], dim: int) -> ClassicalSymbol:
    modulation = descriptor.get("modulation")
    return random_elliptic(
        dim,
        int(descriptor.get("n", 2)),
        float(descriptor.get("order", 1.0)),
        int(descriptor.get("seed", 0)),
        modulation=build_field(modulation, dim) if modulation is not None else None,
    )


def _build_modulated(descriptor: Mapping[str, Any], dim: int) -> ClassicalSymbol:
    coefficient = build_field(descriptor.get("coefficient", {"kind": "gaussian"}), dim)
    offset = float(descriptor.get("offset", 1.0))
    return coefficient_abs_power(coefficient + offset, float(descriptor.get("order", 1.0)), dim)


SYMBOL_FAMILIES: Mapping[str, Callable[[Mapping[str, Any], int], ClassicalSymbol]] = {
    "abs_power": _build_abs_power,
    "bessel": _build_bessel,
    "random_elliptic": _build_random,
    "modulated_abs_power": _build_modulated,
}


def build_symbol(descriptor: Mapping[str, Any], dim: int) -> ClassicalSymbol:
    """Símbolo integrado a partir de ``{"family": ..., parámetros}``."""

    family = descriptor.get("family")
    try:
        builder = SYMBOL_FAMILIES[family]
    except KeyError as exc:
        raise ConfigurationError(
            f"Familia de símbolos desconocida: '{family}'. Disponibles: {sorted(SYMBOL_FAMILIES)}."
        ) from exc
    symbol = builder(descriptor, dim)
    LOGGER.debug(
        "Símbolo '%s' construido (orden %s, n=%d)", symbol.name, symbol.order, symbol.algebra.n
    )
    return symbol


__all__ = [
    "SYMBOL_FAMILIES",
    "abs_power",
    "build_field",
    "build_profile",
    "build_symbol",
    "classical_expansion_of_bessel",
    "coefficient_abs_power",
    "frequency_symbol",
    "multiplication_symbol",
    "random_elliptic",
    "sphere_harmonic",
    "x_times_xi",
]
