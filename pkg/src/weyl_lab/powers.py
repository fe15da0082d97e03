"""Potencias complejas: matrices, integral de Dunford y símbolos de potencia."""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .elliptic import inverse_recursion, require_elliptic, require_positive
from .errors import DomainError, SingularResolventError
from .quadrature import composite_gauss_legendre, gauss_legendre
from .symbols.classical import (
    DEFAULT_TRUNCATION,
    ClassicalSymbol,
    compose_symbols,
    evaluate_symbol,
)
from .symbols.components import HomogeneousComponent
from .symbols.jets import Jet, cached_jet, jet_cache, zero_jet

LOGGER = logging.getLogger("weyl_lab.powers")

MIN_CONTOUR_NODES = 64
_HERMITIAN_TOL = 1e-10
_FLOOR_TOL = 1e-12


def _check_positive(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape[-1] != matrix.shape[-2]:
        raise DomainError(f"Se esperaba una matriz cuadrada, recibido {matrix.shape}.")
    scale = np.linalg.norm(matrix, ord=2, axis=(-2, -1))
    asymmetry = np.linalg.norm(matrix - np.conj(np.swapaxes(matrix, -1, -2)), ord=2, axis=(-2, -1))
    if np.any(asymmetry > _HERMITIAN_TOL * np.maximum(scale, 1e-300)):
        raise DomainError(
            f"La matriz no es hermítica (asimetría {float(np.max(asymmetry)):.3g})."
        )
    return scale


def matrix_power(matrix: Any, z: complex) -> np.ndarray:
    """``P^z`` por descomposición espectral (admite lotes ``(..., n, n)``)."""

    matrix = np.asarray(matrix, dtype=complex)
    scale = _check_positive(matrix)
    eigenvalues, vectors = np.linalg.eigh(matrix)
    if np.any(eigenvalues[..., 0] < _FLOOR_TOL * scale):
        raise DomainError(
            f"Matriz no definida positiva: autovalor mínimo {float(np.min(eigenvalues)):.3g}."
        )
    powered = np.power(eigenvalues.astype(complex), z)
    return (vectors * powered[..., None, :]) @ np.conj(np.swapaxes(vectors, -1, -2))


@dataclass(frozen=True)
class ContourRule:
    """Nodos ``λ`` y pesos de ``P^z ≈ Σ_q w_q (P - λ_q)^{-1}`` más la cola analítica."""

    lam: np.ndarray
    weights: np.ndarray
    far: np.ndarray
    exponent: complex

    @property
    def size(self) -> int:
        return int(self.lam.shape[0])

    def tail_coefficients(self, terms: int) -> list[np.ndarray]:
        """Coeficientes ``c_k`` de la cola ``Σ_k c_k (-P)^k`` más allá de ``|λ| = far``."""

        z = self.exponent
        factor = cmath.sin(math.pi * z) / math.pi
        far = self.far.astype(complex)
        return [factor * np.power(far, z - k) / (z - k) for k in range(terms)]


@dataclass(frozen=True)
class DunfordContour:
    """Contorno de ojo de cerradura para ``Re z < 0``.

    Los dos rayos ``arg λ = ±π`` se integran juntos en la variable ``s = log|λ|`` con
    paneles de Gauss–Legendre de longitud <= 1 entre ``r = suelo/2`` y
    ``far_factor·techo``; el arco ``|λ| = r`` usa ``arc_nodes`` ángulos de Gauss–Legendre.
    """

    nodes: int = MIN_CONTOUR_NODES
    panel_nodes: int = 16
    arc_nodes: int = 64
    far_factor: float = 1e6
    tail_terms: int = 3

    def __post_init__(self) -> None:
        if self.nodes < MIN_CONTOUR_NODES:
            raise DomainError(
                f"El contorno necesita al menos {MIN_CONTOUR_NODES} nodos (recibido {self.nodes})."
            )

    def rule(self, floor: Any, ceiling: Any, z: complex) -> ContourRule:
        z = complex(z)
        if z.real >= 0:
            raise DomainError(f"La integral de Dunford directa requiere Re z < 0 (z={z}).")
        floor = np.asarray(floor, dtype=float)
        ceiling = np.asarray(ceiling, dtype=float)
        if np.any(floor <= 0):
            raise SingularResolventError("El contorno requiere un espectro estrictamente positivo.")
        radius = 0.5 * floor
        far = self.far_factor * np.maximum(ceiling, floor)
        start = np.log(radius)
        span = np.log(far) - start
        panels = max(int(math.ceil(float(np.max(span)))), self.nodes // self.panel_nodes, 1)
        tau, tau_w = composite_gauss_legendre(0.0, 1.0, panels, self.panel_nodes)
        expand = (slice(None),) + (None,) * floor.ndim
        t = np.exp(start[None] + span[None] * tau[expand])
        ray_factor = -cmath.sin(math.pi * z) / math.pi
        ray_weights = ray_factor * np.power(t.astype(complex), z + 1.0)
        ray_weights = ray_weights * (span[None] * tau_w[expand])

        theta, theta_w = gauss_legendre(-math.pi, math.pi, self.arc_nodes)
        phase = np.exp(1j * theta)[expand]
        arc_lam = radius[None] * phase
        arc_weights = (
            np.power(radius.astype(complex), z + 1.0)[None]
            * np.exp(1j * (z + 1.0) * theta)[expand]
            * theta_w[expand]
            / (2.0 * math.pi)
        )
        lam = np.concatenate([-t.astype(complex), arc_lam], axis=0)
        weights = np.concatenate([ray_weights, arc_weights], axis=0)
        return ContourRule(lam=lam, weights=weights, far=far, exponent=z)


def contour_power(
    matrix: Any,
    z: complex,
    nodes: int = MIN_CONTOUR_NODES,
    chunk: int = 64,
    contour: DunfordContour | None = None,
) -> np.ndarray:
    """``P^z`` por cuadratura de la integral de Dunford (oráculo independiente de ``eigh``).

    ``contour`` sustituye al contorno por defecto de ``nodes`` nodos, cola incluida.
    """

    matrix = np.asarray(matrix, dtype=complex)
    _check_positive(matrix)
    z = complex(z)
    if z.real >= 0:
        raise DomainError(f"contour_power requiere Re z < 0 (z={z}).")
    spectrum = np.linalg.eigvalsh(matrix)
    floor, ceiling = float(spectrum[0]), float(spectrum[-1])
    if floor <= _FLOOR_TOL * max(abs(ceiling), 1e-300):
        raise DomainError(f"Matriz no definida positiva: autovalor mínimo {floor:.3g}.")
    contour = contour or DunfordContour(nodes=nodes)
    rule = contour.rule(floor, ceiling, z)
    n = matrix.shape[0]
    identity = np.eye(n, dtype=complex)
    result = np.zeros((n, n), dtype=complex)
    for start in range(0, rule.size, chunk):
        lam = rule.lam[start : start + chunk]
        try:
            resolvents = np.linalg.inv(matrix[None] - lam[:, None, None] * identity)
        except np.linalg.LinAlgError as exc:
            raise SingularResolventError("El contorno toca el espectro.", lam) from exc
        result += np.einsum("q,qij->ij", rule.weights[start : start + chunk], resolvents)
    power = identity
    for coefficient in rule.tail_coefficients(contour.tail_terms):
        result += coefficient * power
        power = -power @ matrix
    return result


# ----------------------------------------------------------------------
# Símbolos de potencia
# ----------------------------------------------------------------------
@dataclass(eq=False)
class _PowerEngine:
    base: ClassicalSymbol
    exponent: complex
    truncation: int
    contour: DunfordContour = field(default_factory=DunfordContour)

    def resolvents(self, x: np.ndarray, xi: np.ndarray) -> tuple[ContourRule, list[Any]]:
        def build() -> tuple[ContourRule, list[Any]]:
            principal = self.base.principal.value(x, xi)
            spectrum = np.linalg.eigvalsh(principal)
            rule = self.contour.rule(spectrum[..., 0], spectrum[..., -1], self.exponent)
            parts = inverse_recursion(self.base, self.truncation, spectral=rule.lam, prefix="R")
            return rule, parts

        return cached_jet(self, -1, (x, xi), build)

    def jet(self, level: int, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        rule, parts = self.resolvents(x, xi)
        part = parts[level]
        n = self.base.algebra.n
        batch = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        if part.is_zero:
            return zero_jet(2 * self.base.dim, order, batch, n)
        resolvent = part.jet(x, xi, order)
        weights = rule.weights[None, ..., None, None]
        coeffs = np.sum(resolvent.coeffs * weights, axis=1)
        result = Jet(coeffs, resolvent.table)
        if level == 0:
            principal = self.base.principal.jet(x, xi, order)
            identity = np.broadcast_to(np.eye(n), batch + (n, n))
            power = Jet.constant(identity, 2 * self.base.dim, order)
            for coefficient in rule.tail_coefficients(self.contour.tail_terms):
                result = result + power * coefficient
                power = -(power * principal)
            exact = matrix_power(principal.value, self.exponent)
            coeffs = result.coeffs.copy()
            coeffs[0] = exact
            result = Jet(coeffs, result.table)
        return result


@dataclass(frozen=True, eq=False)
class ContourPowerComponent(HomogeneousComponent):
    """Componente ``σ(B)^{(z)}_{mz-j}`` por cuadratura de ``∫ λ^z σ(B)⁰_{-m-j}(λ) dλ``."""

    engine: _PowerEngine
    level: int
    label: str = ""

    @property
    def degree(self) -> complex:
        return self.engine.base.order * self.engine.exponent - self.level

    @property
    def dim(self) -> int:
        return self.engine.base.dim

    @property
    def size(self) -> int:
        return self.engine.base.algebra.n

    @property
    def x_dependent(self) -> bool:
        return self.engine.base.x_dependent

    @property
    def is_zero(self) -> bool:
        parts = inverse_recursion(self.engine.base, self.level + 1)
        return parts[self.level].is_zero

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        return self.engine.jet(self.level, x, xi, order)


@dataclass(frozen=True, eq=False)
class PowerSymbol:
    """Símbolo clásico de ``A^z`` con orden ``m·z``."""

    base: ClassicalSymbol
    exponent: complex
    symbol: ClassicalSymbol
    truncation: int
    lift: int = 0

    @property
    def components(self) -> tuple[HomogeneousComponent, ...]:
        return self.symbol.components

    @property
    def order(self) -> complex:
        return self.symbol.order

    def __call__(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return evaluate_symbol(self.symbol, x, xi)


def _iterated_composition(symbol: ClassicalSymbol, times: int, truncation: int) -> ClassicalSymbol:
    result = symbol.truncated(truncation)
    for _ in range(times - 1):
        result = compose_symbols(result, symbol, truncation)
    return result


def _direct_power(
    symbol: ClassicalSymbol, z: complex, truncation: int, nodes: int
) -> ClassicalSymbol:
    engine = _PowerEngine(symbol, z, truncation, DunfordContour(nodes=nodes))
    components = tuple(
        ContourPowerComponent(engine, level, label=f"{symbol.name}^({z})_{level}")
        for level in range(truncation)
    )
    return ClassicalSymbol(
        order=symbol.order * z,
        components=components,
        algebra=symbol.algebra,
        dim=symbol.dim,
        cutoff=symbol.cutoff,
        name=f"{symbol.name}^({z:g})",
    )


def _validate_base(symbol: ClassicalSymbol) -> float:
    order = symbol.real_order
    if order <= 0:
        raise DomainError(f"Las potencias complejas requieren orden real m > 0 (m={order}).")
    require_positive(symbol, sphere_samples=32, space_samples=32)
    return order


def lifted_power_symbol(
    symbol: ClassicalSymbol,
    z: complex,
    k: int,
    truncation: int = DEFAULT_TRUNCATION,
    nodes: int = MIN_CONTOUR_NODES,
) -> PowerSymbol:
    """``A^k·B^{(z-k)}`` por composición de Leibniz; requiere ``Re(z-k) < 0``."""

    _validate_base(symbol)
    z = complex(z)
    if (z - k).real >= 0:
        raise DomainError(f"El levantamiento requiere Re(z-k) < 0 (z={z}, k={k}).")
    inner = _direct_power(symbol, z - k, truncation, nodes)
    if k <= 0:
        return PowerSymbol(symbol, z, inner, truncation, 0)
    lifted = compose_symbols(_iterated_composition(symbol, k, truncation), inner, truncation)
    named = ClassicalSymbol(
        order=lifted.order,
        components=lifted.components,
        algebra=lifted.algebra,
        dim=lifted.dim,
        cutoff=lifted.cutoff,
        name=f"{symbol.name}^({z:g})",
    )
    return PowerSymbol(symbol, z, named, truncation, k)


def power_symbol(
    symbol: ClassicalSymbol,
    z: complex,
    truncation: int = DEFAULT_TRUNCATION,
    nodes: int = MIN_CONTOUR_NODES,
) -> PowerSymbol:
    """Símbolo de ``A^z``: contorno directo si ``Re z < 0``, si no ``k = ⌊Re z⌋ + 1``."""

    z = complex(z)
    k = 0 if z.real < 0 else int(math.floor(z.real)) + 1
    LOGGER.debug("Potencia %s de '%s' (levantamiento k=%d)", z, symbol.name, k)
    return lifted_power_symbol(symbol, z, k, truncation, nodes)


@dataclass(frozen=True, eq=False)
class ModulusPower:
    """``(x, ξ) ↦ |σ_m(x, ξ)|^z = (σ_m*σ_m)^{z/2}``."""

    symbol: ClassicalSymbol
    exponent: complex

    def __call__(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        with jet_cache():
            values = self.symbol.principal.value(np.asarray(x, float), np.asarray(xi, float))
        gram = np.conj(np.swapaxes(values, -1, -2)) @ values
        gram = 0.5 * (gram + np.conj(np.swapaxes(gram, -1, -2)))
        return matrix_power(gram, self.exponent / 2.0)


def principal_modulus_power(symbol: ClassicalSymbol, z: complex) -> ModulusPower:
    """``|σ_m|^z``; exige elipticidad pero no autoadjunción."""

    require_elliptic(symbol, sphere_samples=32, space_samples=32)
    return ModulusPower(symbol, complex(z))


def modulus_trace(matrix: Any, exponent: float) -> np.ndarray:
    """``τ(|X|^q)`` por lotes con ``q > 0`` (admite ``X`` singular)."""

    matrix = np.asarray(matrix, dtype=complex)
    gram = np.conj(np.swapaxes(matrix, -1, -2)) @ matrix
    gram = 0.5 * (gram + np.conj(np.swapaxes(gram, -1, -2)))
    eigenvalues = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    return np.sum(eigenvalues ** (exponent / 2.0), axis=-1)


__all__ = [
    "ContourPowerComponent",
    "ContourRule",
    "DunfordContour",
    "ModulusPower",
    "PowerSymbol",
    "contour_power",
    "lifted_power_symbol",
    "matrix_power",
    "modulus_trace",
    "power_symbol",
    "principal_modulus_power",
]
