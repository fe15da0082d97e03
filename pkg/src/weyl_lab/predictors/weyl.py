"""Lados derechos en forma cerrada de las leyes de Weyl, del conteo y de la densidad de estados."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..powers import matrix_power, modulus_trace
from ..quadrature import Box, box_rule, refined_sphere_nodes, sphere_rule
from ..symbols.classical import ClassicalSymbol
from ..symbols.fields import SpatialProfile
from ..symbols.jets import jet_cache

LOGGER = logging.getLogger("weyl_lab.predictors")

DEFAULT_SPACE_NODES = 32
REFINEMENT_TOL = 0.01

Realizations = Union[ClassicalSymbol, Sequence[tuple[ClassicalSymbol, float]]]


@dataclass(frozen=True)
class Prediction:
    """Valor predicho con su comparación contra un nivel de cuadratura más fino."""

    value: float
    coarse: float
    relative_change: float
    warning: str | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_payload(self) -> dict[str, Any]:
        payload = {
            "value": self.value,
            "coarse": self.coarse,
            "relative_change": self.relative_change,
            "warning": self.warning,
        }
        payload.update(self.details)
        return payload


def _realizations(symbols: Realizations) -> list[tuple[ClassicalSymbol, float]]:
    if isinstance(symbols, ClassicalSymbol):
        return [(symbols, 1.0)]
    pairs = [(symbol, float(weight)) for symbol, weight in symbols]
    if not pairs:
        raise ConfigurationError("Se necesita al menos una realización del símbolo.")
    if any(weight < 0 for _, weight in pairs):
        raise ConfigurationError("Los pesos de esperanza deben ser no negativos.")
    return pairs


def _space_box(*candidates: Box | None) -> Box:
    for box in candidates:
        if box is not None:
            return box
    raise ConfigurationError("La integral espacial necesita un soporte compacto conocido.")


def _product_rule(
    box: Box, dim: int, sphere_nodes: int | None, space_nodes: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x, wx = box_rule(box, space_nodes)
    u, wu = sphere_rule(dim, sphere_nodes)
    return x, wx, u, wu


def _principal(symbol: ClassicalSymbol, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    with jet_cache():
        return symbol.principal.value(x[:, None, :], u[None, :, :])


def _refine(
    compute: Callable[[int | None, int], float],
    dim: int,
    sphere_nodes: int | None,
    space_nodes: int,
    label: str,
) -> Prediction:
    """Evalúa en dos niveles de cuadratura y avisa si difieren más de un 1 %."""

    coarse = compute(sphere_nodes, space_nodes)
    fine = compute(refined_sphere_nodes(dim, sphere_nodes), space_nodes + space_nodes // 2)
    change = abs(fine - coarse) / max(abs(fine), 1e-300) if fine or coarse else 0.0
    warning = None
    if change > REFINEMENT_TOL:
        warning = f"{label}: la cuadratura refinada cambia el valor un {100 * change:.2f} %"
        LOGGER.warning(warning)
    return Prediction(float(fine), float(coarse), float(change), warning)


# ----------------------------------------------------------------------
# Operadores de orden negativo
# ----------------------------------------------------------------------
def expected_weyl(
    symbols: Realizations,
    right: SpatialProfile,
    m: float | None = None,
    d: int | None = None,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> Prediction:
    """``d^{-m/d}(2π)^{-m}[∫_{S^{d-1}}∫ τ(|σ_{-m}(x,s) f(x)|^{d/m})]^{m/d}``.

    Con varias realizaciones la integral se promedia con sus pesos (traza de esperanza).
    """

    pairs = _realizations(symbols)
    first = pairs[0][0]
    m = -first.real_order if m is None else float(m)
    d = first.dim if d is None else int(d)
    if m <= 0:
        raise DomainError(f"expected_weyl requiere orden negativo -m < 0 (m={m}).")
    box = _space_box(right.support, first.support)
    q = d / m

    def compute(sn: int | None, xn: int) -> float:
        x, wx, u, wu = _product_rule(box, d, sn, xn)
        f = right.values(x)
        total = 0.0
        for symbol, weight in pairs:
            values = _principal(symbol, x, u) @ f[:, None]
            total += weight * float(np.einsum("i,j,ij->", wx, wu, modulus_trace(values, q)))
        return d ** (-m / d) * (2.0 * math.pi) ** (-m) * max(total, 0.0) ** (m / d)

    return _refine(compute, d, sphere_nodes, space_nodes, "expected_weyl")


def elliptic_weyl(
    symbol: ClassicalSymbol,
    localizer: SpatialProfile,
    projection: Any = None,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> Prediction:
    """Ley de Weyl de ``M_g p A^{-1} p M_g`` para ``A`` elíptico positivo de orden ``m``.

    ``d^{-m/d}(2π)^{-m}[∫∫ τ(|g|^{2d/m}·|σ_m|^{-d/m}·p)]^{m/d}`` con ``g`` escalar.
    """

    m = symbol.real_order
    d = symbol.dim
    if m <= 0:
        raise DomainError(f"elliptic_weyl requiere orden positivo (m={m}).")
    n = symbol.algebra.n
    p = np.eye(n, dtype=complex) if projection is None else np.asarray(projection, complex)
    if p.shape != (n, n) or not np.allclose(p @ p, p) or not np.allclose(p, p.conj().T):
        raise ConfigurationError("La proyección debe ser una matriz n×n ortogonal e idempotente.")
    box = _space_box(localizer.support)
    q = d / m

    def compute(sn: int | None, xn: int) -> float:
        x, wx, u, wu = _product_rule(box, d, sn, xn)
        g = np.abs(localizer.values(x)[:, 0, 0]) ** (2.0 * q)
        principal = _principal(symbol, x, u)
        gram = np.conj(np.swapaxes(principal, -1, -2)) @ principal
        modulus = matrix_power(0.5 * (gram + np.conj(np.swapaxes(gram, -1, -2))), -q / 2.0)
        traces = np.real(np.trace(modulus @ p, axis1=-2, axis2=-1))
        total = float(np.einsum("i,j,ij->", wx * g, wu, traces))
        return d ** (-m / d) * (2.0 * math.pi) ** (-m) * max(total, 0.0) ** (m / d)

    return _refine(compute, d, sphere_nodes, space_nodes, "elliptic_weyl")


def dixmier_prediction(
    symbol: ClassicalSymbol,
    right: SpatialProfile | None = None,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> Prediction:
    """Valor de Connes–Dixmier ``d^{-1}(2π)^{-d}∫∫ τ(σ_{-d}(x,s) f(x))`` (orden ``-d``)."""

    d = symbol.dim
    if abs(symbol.real_order + d) > 1e-12:
        raise DomainError(f"El valor de Dixmier requiere orden -d = {-d} (orden {symbol.order}).")
    box = _space_box(None if right is None else right.support, symbol.support)

    def compute(sn: int | None, xn: int) -> float:
        x, wx, u, wu = _product_rule(box, d, sn, xn)
        values = _principal(symbol, x, u)
        if right is not None:
            values = values @ right.values(x)[:, None]
        traces = symbol.algebra.trace(values)
        total = np.einsum("i,j,ij->", wx, wu, traces)
        if abs(total.imag) > 1e-8 * max(abs(total), 1e-300):
            LOGGER.warning("Integral de Dixmier con parte imaginaria %.3e", total.imag)
        return float(total.real) / (d * (2.0 * math.pi) ** d)

    return _refine(compute, d, sphere_nodes, space_nodes, "dixmier_prediction")


# ----------------------------------------------------------------------
# Conteo de autovalores
# ----------------------------------------------------------------------
def _counting_constant(
    pairs: list[tuple[ClassicalSymbol, float]],
    box: Box,
    sphere_nodes: int | None,
    space_nodes: int,
    weight: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> float:
    """``(1/(d(2π)^d)) Σ_ω p_ω ∫_{S^{d-1}}∫ τ(W(x,s)·σ_m(x,s)^{-d/m})``."""

    symbol = pairs[0][0]
    m = symbol.real_order
    d = symbol.dim
    if m <= 0:
        raise DomainError(f"El conteo requiere orden positivo (m={m}).")
    x, wx, u, wu = _product_rule(box, d, sphere_nodes, space_nodes)
    total = 0.0j
    for realization, probability in pairs:
        powered = matrix_power(_principal(realization, x, u), -d / m)
        if weight is not None:
            powered = weight(x, u) @ powered
        traces = realization.algebra.trace(powered)
        total += probability * np.einsum("i,j,ij->", wx, wu, traces)
    if abs(total.imag) > 1e-8 * max(abs(total), 1e-300):
        LOGGER.warning("Constante de conteo con parte imaginaria %.3e", total.imag)
    return float(total.real) / (d * (2.0 * math.pi) ** d)


def microlocal_prediction(
    symbol: ClassicalSymbol,
    localizer: SpatialProfile,
    lam: float,
    observable: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> Prediction:
    """``λ^{d/m}·(1/(d(2π)^d))∫∫ τ(φ(x)·q(x,s)·σ_m(x,s)^{-d/m})``.

    ``observable`` es el símbolo principal ``q`` de ``Q`` evaluado en lotes ``(x, s)``.
    """

    m = symbol.real_order
    d = symbol.dim
    box = _space_box(localizer.support)

    def weight(x: np.ndarray, u: np.ndarray) -> np.ndarray:
        phi = localizer.values(x)[:, None]
        if observable is None:
            return phi
        return phi @ np.asarray(observable(x[:, None, :], u[None, :, :]), dtype=complex)

    def compute(sn: int | None, xn: int) -> float:
        constant = _counting_constant([(symbol, 1.0)], box, sn, xn, weight)
        return max(lam, 0.0) ** (d / m) * constant

    return _refine(compute, d, sphere_nodes, space_nodes, "microlocal_prediction")


def dos_prediction(
    symbols: Realizations,
    lam: float,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> float:
    """``λ^{d/m}·(1/(d(2π)^d))∫_{S^{d-1}}∫_{[0,1]^d} E τ(σ_m^{-d/m})``."""

    pairs = _realizations(symbols)
    symbol = pairs[0][0]
    if lam <= 0:
        return 0.0
    d = symbol.dim
    cell = Box(tuple([0.0] * d), tuple([1.0] * d))
    constant = _counting_constant(pairs, cell, sphere_nodes, space_nodes)
    return lam ** (d / symbol.real_order) * constant


__all__ = [
    "Prediction",
    "dixmier_prediction",
    "dos_prediction",
    "elliptic_weyl",
    "expected_weyl",
    "microlocal_prediction",
]
