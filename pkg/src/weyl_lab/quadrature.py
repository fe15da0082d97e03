"""Cajas espaciales, cuadraturas producto y reglas sobre la esfera unidad."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .errors import ConfigurationError

# Número de nodos Lebedev -> grado de exactitud polinómica.
LEBEDEV_DEGREES = {26: 7, 50: 11, 86: 15, 146: 19, 194: 23}
DEFAULT_CIRCLE_NODES = 64
DEFAULT_LEBEDEV_NODES = 50


@dataclass(frozen=True)
class Box:
    """Caja alineada con los ejes ``[lower, upper]``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise ConfigurationError("Los extremos de la caja deben tener la misma dimensión.")
        if any(hi < lo for lo, hi in zip(self.lower, self.upper)):
            raise ConfigurationError(f"Caja vacía: {self.lower} > {self.upper}.")

    @classmethod
    def cube(cls, dim: int, half_width: float, center: tuple[float, ...] | None = None) -> Box:
        center = center or (0.0,) * dim
        return cls(
            tuple(float(c) - half_width for c in center),
            tuple(float(c) + half_width for c in center),
        )

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def diameter(self) -> float:
        return float(self.widths.max())

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def intersect(self, other: Box | None) -> Box | None:
        if other is None:
            return self
        lower = tuple(max(a, b) for a, b in zip(self.lower, other.lower))
        upper = tuple(min(a, b) for a, b in zip(self.upper, other.upper))
        upper = tuple(max(lo, hi) for lo, hi in zip(lower, upper))
        return Box(lower, upper)

    def hull(self, other: Box) -> Box:
        lower = tuple(min(a, b) for a, b in zip(self.lower, other.lower))
        upper = tuple(max(a, b) for a, b in zip(self.upper, other.upper))
        return Box(lower, upper)

    def inside(self, bound: float, tol: float = 1e-12) -> bool:
        """Comprueba ``box ⊂ [-bound, bound]^d``."""

        pairs = zip(self.lower, self.upper)
        return all(lo >= -bound - tol and hi <= bound + tol for lo, hi in pairs)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        return np.all((points >= lower) & (points <= upper), axis=-1)

    def to_payload(self) -> dict[str, list[float]]:
        return {"lower": list(self.lower), "upper": list(self.upper)}


def box_union(boxes: list[Box | None]) -> Box | None:
    """Envolvente de varias cajas; ``None`` (sin soporte compacto) absorbe."""

    result: Box | None = None
    for box in boxes:
        if box is None:
            return None
        result = box if result is None else result.hull(box)
    return result


def box_intersection(boxes: list[Box | None]) -> Box | None:
    result: Box | None = None
    for box in boxes:
        if box is None:
            continue
        result = box if result is None else result.intersect(box)
    return result


@lru_cache(maxsize=32)
def _legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(nodes)


def gauss_legendre(a: float, b: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = _legendre(nodes)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def composite_gauss_legendre(
    a: float, b: float, panels: int, nodes: int
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre compuesto con ``panels`` paneles iguales de ``nodes`` nodos."""

    edges = np.linspace(a, b, panels + 1)
    parts = [gauss_legendre(lo, hi, nodes) for lo, hi in zip(edges[:-1], edges[1:])]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def box_rule(box: Box, nodes_per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Cuadratura tensorial de Gauss–Legendre sobre ``box``: ``(puntos (K,d), pesos (K,))``."""

    axes = [gauss_legendre(lo, hi, nodes_per_axis) for lo, hi in zip(box.lower, box.upper)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    weights = np.ones_like(grids[0])
    for dim, (_, w) in enumerate(axes):
        shape = [1] * box.dim
        shape[dim] = nodes_per_axis
        weights = weights * w.reshape(shape)
    points = np.stack([g.ravel() for g in grids], axis=-1)
    return points, weights.ravel()


def sphere_volume(dim: int) -> float:
    """Medida de ``S^{d-1}`` (``S^0`` cuenta dos puntos)."""

    return 2.0 * math.pi ** (dim / 2.0) / special.gamma(dim / 2.0)


@lru_cache(maxsize=32)
def _sphere_rule(dim: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        theta = 2.0 * math.pi * np.arange(nodes) / nodes
        points = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return points, np.full(nodes, 2.0 * math.pi / nodes)
    if dim == 3:
        try:
            degree = LEBEDEV_DEGREES[nodes]
        except KeyError as exc:
            raise ConfigurationError(
                f"Regla de Lebedev no disponible para {nodes} nodos; usa {sorted(LEBEDEV_DEGREES)}."
            ) from exc
        points, weights = integrate.lebedev_rule(degree)
        return np.ascontiguousarray(points.T), np.asarray(weights)
    raise ConfigurationError(f"Cuadratura esférica no implementada para d={dim}.")


def sphere_rule(dim: int, nodes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos sobre ``S^{d-1}``; los pesos suman la medida de la esfera."""

    if nodes is None:
        nodes = {1: 2, 2: DEFAULT_CIRCLE_NODES, 3: DEFAULT_LEBEDEV_NODES}.get(dim, 0)
    return _sphere_rule(dim, nodes)


def refined_sphere_nodes(dim: int, nodes: int | None) -> int | None:
    """Nivel siguiente de refinamiento de la regla esférica."""

    if dim == 1:
        return None
    if dim == 2:
        return 2 * (nodes or DEFAULT_CIRCLE_NODES)
    ladder = sorted(LEBEDEV_DEGREES)
    current = nodes or DEFAULT_LEBEDEV_NODES
    larger = [n for n in ladder if n > current]
    return larger[0] if larger else current


def sphere_directions(dim: int, count: int) -> np.ndarray:
    """Direcciones de muestreo deterministas (no es una cuadratura)."""

    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = 2.0 * math.pi * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    if dim == 3:
        # Red de Fibonacci.
        k = np.arange(count) + 0.5
        polar = np.arccos(1.0 - 2.0 * k / count)
        azimuth = math.pi * (1.0 + math.sqrt(5.0)) * k
        return np.stack(
            [np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar), np.cos(polar)],
            axis=-1,
        )
    raise ConfigurationError(f"Muestreo esférico no implementado para d={dim}.")


__all__ = [
    "Box",
    "LEBEDEV_DEGREES",
    "box_intersection",
    "box_rule",
    "box_union",
    "composite_gauss_legendre",
    "gauss_legendre",
    "refined_sphere_nodes",
    "sphere_directions",
    "sphere_rule",
    "sphere_volume",
]
