"""Certificado de elipticidad, parametriz y recursión de los símbolos del resolvente."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import linalg

from .errors import DomainError, EllipticityError, SingularResolventError
from .quadrature import sphere_directions
from .symbols.classical import (
    DEFAULT_TRUNCATION,
    ClassicalSymbol,
    sample_space_points,
)
from .symbols.components import HomogeneousComponent, leibniz_terms
from .symbols.jets import Jet, MultiIndex, jet_cache, multi_factorial, zero_jet

LOGGER = logging.getLogger("weyl_lab.elliptic")

DEFAULT_SPHERE_SAMPLES = 200
DEFAULT_SPACE_SAMPLES = 200
_SINGULAR_TOL = 1e-10
_HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class EllipticityReport:
    """Certificado muestral de las condiciones (E1)/(E2) sobre ``|ξ| = 1``."""

    is_elliptic: bool
    constant_C: float
    modulus_bound_C2: float
    samples: int
    hermitian: bool = False
    positivity_floor: float | None = None
    spectral_ceiling: float = 0.0
    offending_point: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    @property
    def is_positive(self) -> bool:
        return (
            self.is_elliptic
            and self.hermitian
            and self.positivity_floor is not None
            and self.positivity_floor > 0
        )

    @property
    def default_shift(self) -> float:
        """``ρ`` por defecto del desplazamiento ``A → A + ρ``: mitad del suelo espectral."""

        return 0.5 * (self.positivity_floor or 0.0)

    def to_payload(self) -> dict[str, Any]:
        return {
            "is_elliptic": self.is_elliptic,
            "constant_C": self.constant_C,
            "modulus_bound_C2": self.modulus_bound_C2,
            "samples": self.samples,
            "hermitian": self.hermitian,
            "positivity_floor": self.positivity_floor,
            "spectral_ceiling": self.spectral_ceiling,
            "offending_point": self.offending_point,
        }


@dataclass(frozen=True)
class KeyholeSpec:
    """Región ``{|λ| < r} ∪ {|arg λ - π| < π/4}``."""

    arc_radius: float
    ray_angle: float = math.pi
    half_aperture: float = math.pi / 4

    def __post_init__(self) -> None:
        if self.arc_radius <= 0:
            raise DomainError(f"El radio del arco debe ser positivo (recibido {self.arc_radius}).")

    @classmethod
    def from_report(cls, report: EllipticityReport) -> KeyholeSpec:
        if not report.is_positive:
            raise DomainError("El ojo de cerradura requiere un símbolo principal positivo.")
        return cls(arc_radius=report.default_shift)

    def contains(self, lam: Any) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        offset = np.abs(np.angle(lam * np.exp(-1j * self.ray_angle)))
        return (np.abs(lam) < self.arc_radius) | (offset < self.half_aperture)


def _sample_directions(dim: int, count: int) -> np.ndarray:
    axes = np.concatenate([np.eye(dim), -np.eye(dim)], axis=0)
    if dim == 1:
        return axes
    return np.concatenate([axes, sphere_directions(dim, count)], axis=0)


def check_ellipticity(
    symbol: ClassicalSymbol,
    sphere_samples: int = DEFAULT_SPHERE_SAMPLES,
    space_samples: int = DEFAULT_SPACE_SAMPLES,
) -> EllipticityReport:
    """Evalúa ``σ_m`` en una muestra producto de puntos espaciales y direcciones."""

    x = sample_space_points(symbol, space_samples)
    u = _sample_directions(symbol.dim, sphere_samples)
    with jet_cache():
        values = symbol.principal.value(x[:, None, :], u[None, :, :])
    singular = np.linalg.svd(values, compute_uv=False)
    smallest = singular[..., -1]
    scale = max(float(np.max(singular)), 1.0)
    total = int(smallest.size)

    hermitian = bool(
        np.max(np.abs(values - np.conj(np.swapaxes(values, -1, -2)))) <= _HERMITIAN_TOL * scale
    )
    floor: float | None = None
    ceiling = float(np.max(singular))
    if hermitian:
        eigenvalues = np.linalg.eigvalsh(values)
        floor = float(np.min(eigenvalues))
        ceiling = float(np.max(eigenvalues))

    worst = np.unravel_index(int(np.argmin(smallest)), smallest.shape)
    if smallest[worst] <= _SINGULAR_TOL * scale:
        point = (tuple(float(v) for v in x[worst[0]]), tuple(float(v) for v in u[worst[1]]))
        LOGGER.info("Símbolo '%s' no elíptico en x=%s, u=%s", symbol.name, *point)
        return EllipticityReport(
            is_elliptic=False,
            constant_C=math.inf,
            modulus_bound_C2=float(smallest[worst]),
            samples=total,
            hermitian=hermitian,
            positivity_floor=floor,
            spectral_ceiling=ceiling,
            offending_point=point,
        )
    report = EllipticityReport(
        is_elliptic=True,
        constant_C=float(np.max(1.0 / smallest)),
        modulus_bound_C2=float(np.min(smallest)),
        samples=total,
        hermitian=hermitian,
        positivity_floor=floor,
        spectral_ceiling=ceiling,
    )
    LOGGER.debug(
        "Elipticidad de '%s': C=%.6g, C2=%.6g, %d muestras",
        symbol.name,
        report.constant_C,
        report.modulus_bound_C2,
        total,
    )
    return report


def require_elliptic(symbol: ClassicalSymbol, **sampling: int) -> EllipticityReport:
    report = check_ellipticity(symbol, **sampling)
    if not report.is_elliptic:
        raise EllipticityError(
            f"El símbolo '{symbol.name}' no es elíptico en {report.offending_point}.", report
        )
    return report


def require_positive(symbol: ClassicalSymbol, **sampling: int) -> EllipticityReport:
    report = require_elliptic(symbol, **sampling)
    if not report.is_positive:
        raise EllipticityError(
            f"El símbolo principal de '{symbol.name}' no es hermítico definido positivo "
            f"(suelo {report.positivity_floor}).",
            report,
        )
    return report


# ----------------------------------------------------------------------
# Recursión de la parametriz y del resolvente
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class InverseRecursionComponent(HomogeneousComponent):
    """Término ``b_{-m-j}`` de la inversa izquierda de ``σ - λ``.

    ``b_{-m} = (σ_m - λ)^{-1}`` y ``b_{-m-j} = -[Σ' (1/α!) ∂_ξ^α b_{-m-l} D_x^α σ_{m-k}]·b_{-m}``,
    donde la suma recorre ``|α|+k+l = j`` con ``l < j``. Sin ``λ`` es la parametriz; con
    ``λ`` el grado es conjunto en ``(ξ, λ^{1/m})``.
    """

    source: tuple[HomogeneousComponent, ...]
    level: int
    earlier: tuple[HomogeneousComponent, ...] = ()
    spectral: Any = None
    label: str = ""

    @property
    def degree(self) -> complex:
        return -complex(self.source[0].degree) - self.level

    @property
    def dim(self) -> int:
        return self.source[0].dim

    @property
    def size(self) -> int:
        return self.source[0].size

    def _terms(self) -> Iterator[tuple[MultiIndex, HomogeneousComponent, HomogeneousComponent]]:
        for alpha, k, l in leibniz_terms(self.dim, self.level):
            if l == self.level:
                continue
            b, a = self.earlier[l], self.source[k]
            if b.is_zero or a.is_zero:
                continue
            if sum(alpha) and not a.x_dependent:
                continue
            yield alpha, b, a

    @property
    def jet_order(self) -> int | None:
        if self.level == 0:
            return self.source[0].jet_order
        orders = [self.earlier[0].jet_order]
        for alpha, b, a in self._terms():
            for part in (b, a):
                if part.jet_order is not None:
                    orders.append(part.jet_order - sum(alpha))
        finite = [o for o in orders if o is not None]
        return min(finite) if finite else None

    @property
    def x_dependent(self) -> bool:
        return any(c.x_dependent for c in self.source)

    @property
    def is_zero(self) -> bool:
        return self.level > 0 and next(self._terms(), None) is None

    @property
    def support(self) -> Any:
        return None

    def _principal_inverse(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        base = self.source[0].jet(x, xi, order)
        if self.spectral is not None:
            lam = np.asarray(self.spectral, dtype=complex)
            _check_spectrum(base.value, lam, x, xi)
            base = base - lam
        return base.inverse()

    def _build_jet(self, x: np.ndarray, xi: np.ndarray, order: int) -> Jet:
        if self.level == 0:
            return self._principal_inverse(x, xi, order)
        total = None
        for alpha, b, a in self._terms():
            size = sum(alpha)
            left = b.jet(x, xi, order + size).differentiate(alpha, 0)
            right = a.jet(x, xi, order + size).differentiate(alpha, self.dim)
            term = (left * right) * ((-1j) ** size / multi_factorial(alpha))
            total = term if total is None else total + term
        if total is None:
            batch = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
            return zero_jet(2 * self.dim, order, batch, self.size)
        return -(total * self.earlier[0].jet(x, xi, order))


def _check_spectrum(values: np.ndarray, lam: np.ndarray, x: np.ndarray, xi: np.ndarray) -> None:
    eigenvalues = np.linalg.eigvals(values)
    gap = np.min(np.abs(eigenvalues - lam[..., None]), axis=-1)
    scale = np.maximum(np.abs(lam), np.max(np.abs(eigenvalues), axis=-1)) + 1.0
    ratio = gap / scale
    if np.any(ratio <= 1e-12):
        where = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
        lam_at = complex(np.broadcast_to(lam, ratio.shape)[where])
        batch = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        tail = where[len(where) - len(batch) :]
        x_at = np.broadcast_to(x, batch + x.shape[-1:])[tail]
        xi_at = np.broadcast_to(xi, batch + xi.shape[-1:])[tail]
        location = {"x": x_at.tolist(), "xi": xi_at.tolist(), "lambda": lam_at}
        raise SingularResolventError(
            f"λ={lam_at:.6g} toca el espectro de σ_m en x={x_at.tolist()}, ξ={xi_at.tolist()}.",
            location,
        )


def inverse_recursion(
    symbol: ClassicalSymbol, truncation: int, spectral: Any = None, prefix: str = "b"
) -> list[InverseRecursionComponent]:
    source = symbol.truncated(truncation).components
    parts: list[InverseRecursionComponent] = []
    for level in range(truncation):
        parts.append(
            InverseRecursionComponent(
                source, level, tuple(parts), spectral, label=f"{prefix}_{level}"
            )
        )
    return parts


def parametrix(
    symbol: ClassicalSymbol,
    truncation: int = DEFAULT_TRUNCATION,
    sphere_samples: int = DEFAULT_SPHERE_SAMPLES,
    space_samples: int = DEFAULT_SPACE_SAMPLES,
) -> ClassicalSymbol:
    """Parametriz de orden ``-m``: ``compose(b, σ)`` vale ``1_n`` en grado 0 y 0 debajo."""

    require_elliptic(symbol, sphere_samples=sphere_samples, space_samples=space_samples)
    parts = inverse_recursion(symbol, truncation, prefix=f"{symbol.name}^-1")
    LOGGER.debug("Parametriz de '%s' con %d grados", symbol.name, truncation)
    return ClassicalSymbol(
        order=-symbol.order,
        components=tuple(parts),
        algebra=symbol.algebra,
        dim=symbol.dim,
        spatial_support=None,
        cutoff=symbol.cutoff,
        name=f"{symbol.name}^-1",
    )


def resolvent_symbols(
    symbol: ClassicalSymbol,
    lam: Any,
    truncation: int = DEFAULT_TRUNCATION,
    check: bool = True,
) -> list[tuple[complex, HomogeneousComponent]]:
    """Términos ``σ(B)⁰_{-m-j}(x, ξ, λ)`` del resolvente, ``j = 0 … N-1``.

    ``λ`` puede ser un escalar o un array que se difunde contra el lote de ``(x, ξ)``.
    """

    if check:
        require_positive(symbol, sphere_samples=32, space_samples=32)
    parts = inverse_recursion(symbol, truncation, spectral=lam, prefix="R")
    return [(part.degree, part) for part in parts]


# ----------------------------------------------------------------------
# Umbral empírico del resolvente
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ResolventThreshold:
    """Primer ``t`` de la malla a partir del cual ``‖(A+t)^{-1}‖ <= C(1+t)^{-1}``."""

    threshold: float | None
    constant: float
    t_values: tuple[float, ...]
    ratios: tuple[float, ...]


def empirical_resolvent_threshold(
    operator: Any, constant: float, t_values: Sequence[float] | None = None
) -> ResolventThreshold:
    """Umbral ``l`` medido sobre el rayo ``λ = -t`` para una matriz u operador discreto."""

    matrix = np.asarray(getattr(operator, "matrix", operator), dtype=complex)
    if t_values is None:
        t_values = np.logspace(-3, 6, 64)
    t_arr = np.asarray(t_values, dtype=float)
    scale = max(np.linalg.norm(matrix, ord=2), 1.0)
    if np.max(np.abs(matrix - matrix.conj().T)) <= _HERMITIAN_TOL * scale:
        eigenvalues = linalg.eigvalsh(matrix)
        gaps = np.min(np.abs(eigenvalues[None, :] + t_arr[:, None]), axis=1)
    else:
        identity = np.eye(matrix.shape[0])
        gaps = np.array([linalg.svdvals(matrix + t * identity)[-1] for t in t_arr])
    norms = np.where(gaps > 0, 1.0 / np.maximum(gaps, 1e-300), np.inf)
    ratios = norms * (1.0 + t_arr)
    ok = ratios <= constant
    threshold = None
    for index in range(len(t_arr)):
        if np.all(ok[index:]):
            threshold = float(t_arr[index])
            break
    LOGGER.debug("Umbral empírico del resolvente: %s (C=%.3g)", threshold, constant)
    return ResolventThreshold(threshold, float(constant), tuple(t_arr.tolist()), tuple(ratios))


__all__ = [
    "EllipticityReport",
    "InverseRecursionComponent",
    "KeyholeSpec",
    "ResolventThreshold",
    "check_ellipticity",
    "empirical_resolvent_threshold",
    "inverse_recursion",
    "parametrix",
    "require_elliptic",
    "require_positive",
    "resolvent_symbols",
]
