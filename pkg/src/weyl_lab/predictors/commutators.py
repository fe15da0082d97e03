"""Conmutadores con multiplicadores homogéneos y sus constantes de Weyl."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from ..errors import DomainError, RangeError
from ..powers import modulus_trace
from ..quadrature import box_rule, sphere_rule
from ..quantize import (
    DiscretizedOperator,
    GridSpec,
    bessel_potential,
    commutator,
    degree_zero_multiplier,
    fourier_multiplier,
    homogeneous_power,
    multiplication_op,
)
from ..spectral import SingularValueFunction, singular_value_function, weak_quasinorm
from ..symbols.fields import Field, SpatialProfile, field_jet
from .weyl import DEFAULT_SPACE_NODES, Prediction, _refine, _space_box

LOGGER = logging.getLogger("weyl_lab.predictors")

SphereFunction = Union[Field, Callable[[np.ndarray], Any]]
POTENTIALS = ("riesz", "bessel")
_FD_STEP = 1e-5


def _sphere_values(function: SphereFunction, s: np.ndarray) -> np.ndarray:
    if isinstance(function, Field):
        return field_jet(function, None, s, 0).value[..., 0, 0]
    return np.asarray(function(s), dtype=complex)


def _sphere_gradient(function: SphereFunction, s: np.ndarray) -> np.ndarray:
    """``∇_ξ`` de la extensión homogénea de grado 0, evaluado en ``s`` (``(K, d)``)."""

    s = np.asarray(s, dtype=float)
    dim = s.shape[-1]
    if isinstance(function, Field):
        jet = field_jet(function, None, s, 1)
        grads = []
        for axis in range(dim):
            unit = [0] * dim
            unit[axis] = 1
            grads.append(jet.partial(unit)[..., 0, 0])
        return np.stack(grads, axis=-1)

    def extended(xi: np.ndarray) -> np.ndarray:
        return np.asarray(function(xi / np.linalg.norm(xi, axis=-1, keepdims=True)), complex)

    grads = []
    for axis in range(dim):
        step = np.zeros(dim)
        step[axis] = _FD_STEP
        grads.append((extended(s + step) - extended(s - step)) / (2.0 * _FD_STEP))
    return np.stack(grads, axis=-1)


def _multiplier_from_sphere(function: SphereFunction) -> Callable[[np.ndarray], np.ndarray]:
    return degree_zero_multiplier(lambda s: _sphere_values(function, s))


def cz_commutator_build(
    sphere_function: SphereFunction, profile: SpatialProfile, grid: GridSpec
) -> DiscretizedOperator:
    """``[T_φ, M_f]`` con ``φ`` la extensión de grado 0 de ``sphere_function`` y ``φ(0) = 0``."""

    if grid.dim < 2:
        raise DomainError("El conmutador de Calderón–Zygmund requiere d >= 2.")
    n = profile.n
    multiplier = fourier_multiplier(_multiplier_from_sphere(sphere_function), grid, n=n)
    localizer = multiplication_op(profile, grid, n=n)
    operator = commutator(multiplier, localizer)
    LOGGER.debug("Conmutador CZ ensamblado (lado %d)", operator.side)
    return DiscretizedOperator(grid, operator.algebra, operator.matrix, order_hint=-1.0)


def check_fractional_hypothesis(alpha: float, d: int, potential: str) -> None:
    if potential not in POTENTIALS:
        raise DomainError(f"Potencial desconocido '{potential}'; disponibles {POTENTIALS}.")
    if alpha == 0 or alpha >= 1:
        raise DomainError(f"α={alpha} fuera de la hipótesis del teorema: se requiere α < 1, α ≠ 0.")
    if potential == "bessel":
        return
    if d == 1 and not 0 < alpha < 1:
        raise DomainError(f"Con d=1 la hipótesis del teorema exige α ∈ (0, 1) (α={alpha}).")
    if d >= 2 and not -d / 2 < alpha < 1:
        raise DomainError(
            f"Con d={d} la hipótesis del teorema exige α ∈ (-d/2, 0) ∪ (0, 1) (α={alpha})."
        )


def frac_commutator_build(
    alpha: float, profile: SpatialProfile, grid: GridSpec, potential: str = "riesz"
) -> DiscretizedOperator:
    """``[I^α, M_f]`` (``|ξ|^α``, modo cero a 0) o ``[J^α, M_f]`` con ``(1+|ξ|²)^{α/2}``."""

    check_fractional_hypothesis(alpha, grid.dim, potential)
    symbol = homogeneous_power(alpha) if potential == "riesz" else bessel_potential(alpha)
    n = profile.n
    operator = commutator(
        fourier_multiplier(symbol, grid, n=n), multiplication_op(profile, grid, n=n)
    )
    return DiscretizedOperator(grid, operator.algebra, operator.matrix, order_hint=alpha - 1.0)


def expected_weyl_cz(
    sphere_function: SphereFunction,
    profile: SpatialProfile,
    d: int,
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> Prediction:
    """``(2π)^{-1}d^{-1/d}(∫_{S^{d-1}}∫ τ(|Σ_k ∂_kφ(s)·D_k f(x)|^d))^{1/d}``."""

    if d < 2:
        raise DomainError("La ley de Weyl de Calderón–Zygmund requiere d >= 2.")
    box = _space_box(profile.support)

    def compute(sn: int | None, xn: int) -> float:
        x, wx = box_rule(box, xn)
        u, wu = sphere_rule(d, sn)
        grad_phi = _sphere_gradient(sphere_function, u)
        grad_f = -1j * profile.gradient(x)
        values = np.einsum("jk,ikab->ijab", grad_phi, grad_f)
        total = float(np.einsum("i,j,ij->", wx, wu, modulus_trace(values, d)))
        return (2.0 * math.pi) ** -1 * d ** (-1.0 / d) * total ** (1.0 / d)

    return _refine(compute, d, sphere_nodes, space_nodes, "expected_weyl_cz")


def fractional_constant(alpha: float, d: int) -> float:
    """``C_{d,α} = |α|·d^{(α-1)/d}·(2π)^{α-1}``."""

    return abs(alpha) * d ** ((alpha - 1.0) / d) * (2.0 * math.pi) ** (alpha - 1.0)


def expected_weyl_frac(
    alpha: float,
    profile: SpatialProfile,
    d: int,
    potential: str = "riesz",
    sphere_nodes: int | None = None,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> Prediction:
    """``C_{d,α}(∫_{S^{d-1}}∫ τ(|s·∇f(x)|^{d/(1-α)}))^{(1-α)/d}``."""

    check_fractional_hypothesis(alpha, d, potential)
    box = _space_box(profile.support)
    q = d / (1.0 - alpha)

    def compute(sn: int | None, xn: int) -> float:
        x, wx = box_rule(box, xn)
        u, wu = sphere_rule(d, sn)
        values = np.einsum("jk,ikab->ijab", u, profile.gradient(x))
        total = float(np.einsum("i,j,ij->", wx, wu, modulus_trace(values, q)))
        return fractional_constant(alpha, d) * total ** (1.0 / q)

    return _refine(compute, d, sphere_nodes, space_nodes, "expected_weyl_frac")


# ----------------------------------------------------------------------
# Estimación de Cwikel
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CwikelReport:
    ratio: float
    operator_norm: float
    profile_norm: float
    multiplier_norm: float
    p: float

    def to_payload(self) -> dict[str, Any]:
        return {
            "ratio": self.ratio,
            "operator_norm": self.operator_norm,
            "profile_norm": self.profile_norm,
            "multiplier_norm": self.multiplier_norm,
            "p": self.p,
        }


def cwikel_ratio(
    profile: SpatialProfile,
    multiplier: Callable[[np.ndarray], Any],
    p: float,
    grid: GridSpec,
    space_nodes: int = DEFAULT_SPACE_NODES,
) -> CwikelReport:
    """``‖M_f g(∇)‖_{p,∞} / (‖f‖_p·‖g‖_{p,∞})`` para ``g`` escalar y la medida ``dξ/(2π)^d``."""

    if p <= 2:
        raise RangeError(f"La estimación de Cwikel se comprueba para p > 2 (p={p}).")
    n = profile.n
    operator = multiplication_op(profile, grid, n=n) @ fourier_multiplier(multiplier, grid, n=n)
    operator_norm = weak_quasinorm(singular_value_function(operator), p)
    profile_norm = profile.trace_integral(power=p, nodes=space_nodes) ** (1.0 / p)
    lattice = np.abs(np.asarray(multiplier(grid.frequencies()), dtype=complex).reshape(-1))
    cell = (grid.frequency_spacing / (2.0 * math.pi)) ** grid.dim
    multiplier_norm = weak_quasinorm(SingularValueFunction.from_values(lattice, cell), p)
    denominator = profile_norm * multiplier_norm
    ratio = operator_norm / denominator if denominator > 0 else 0.0
    return CwikelReport(float(ratio), operator_norm, float(profile_norm), multiplier_norm, p)


__all__ = [
    "CwikelReport",
    "POTENTIALS",
    "cwikel_ratio",
    "check_fractional_hypothesis",
    "cz_commutator_build",
    "expected_weyl_cz",
    "expected_weyl_frac",
    "frac_commutator_build",
    "fractional_constant",
]
