"""Realización finita de los ΨDO sobre toros truncados.

La cuantización de Kohn–Nirenberg se ensambla como
``A[(j,a),(l,b)] = (1/P) Σ_k σ_ab(x_j, ξ_k) e^{iξ_k·(x_j - x_l)}`` con ``P = Npts^d``.
Las filas se ensamblan por bloques con una FFT sobre los ejes de frecuencia; los
multiplicadores de Fourier son (bloque-)circulantes y las multiplicaciones son
diagonales por bloques.
"""

from __future__ import annotations

import json
import logging
import math
import struct
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np
from scipy import fft, linalg

from .errors import ConfigurationError, DomainError, GeometryError
from .quadrature import Box
from .symbols.classical import ClassicalSymbol, MatrixAlgebraSpec, evaluate_symbol

LOGGER = logging.getLogger("weyl_lab.quantize")

DEFAULT_NPTS = {1: 256, 2: 64, 3: 16}
DEFAULT_LENGTH_FACTOR = 4.0
_HERMITIAN_TOL = 1e-10
_HEADER = struct.Struct("<Q")


@dataclass(frozen=True)
class GridSpec:
    """Toro ``[-L/2, L/2)^d`` con ``Npts`` puntos por eje y red dual ``ξ_k = 2πk/L``."""

    dim: int
    length: float
    npts: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ConfigurationError(f"Dimensión inválida: {self.dim}.")
        if self.npts < 2 or self.npts % 2:
            raise ConfigurationError(f"Npts debe ser par y >= 2 (recibido {self.npts}).")
        if self.length <= 0:
            raise ConfigurationError(f"La longitud del toro debe ser positiva ({self.length}).")
        if self.npts & (self.npts - 1):
            LOGGER.debug("Npts=%d no es potencia de dos; la FFT será más lenta", self.npts)

    @classmethod
    def for_support(
        cls, support: Box, npts: int | None = None, factor: float = DEFAULT_LENGTH_FACTOR
    ) -> GridSpec:
        """Toro con ``L = factor × diámetro`` del soporte (y margen ``L/4`` garantizado)."""

        reach = max(max(abs(v) for v in support.lower), max(abs(v) for v in support.upper))
        length = max(factor * support.diameter, 4.0 * reach)
        return cls(support.dim, float(length), npts or DEFAULT_NPTS.get(support.dim, 16))

    @property
    def spacing(self) -> float:
        return self.length / self.npts

    @property
    def frequency_spacing(self) -> float:
        return 2.0 * math.pi / self.length

    @property
    def modes(self) -> int:
        return self.npts**self.dim

    @property
    def volume(self) -> float:
        return self.length**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def indices(self) -> np.ndarray:
        """Multi-índices ``j`` de los puntos, ``(P, d)`` en orden C."""

        grids = np.meshgrid(*[np.arange(self.npts)] * self.dim, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def points(self) -> np.ndarray:
        return -0.5 * self.length + self.spacing * self.indices()

    def wavenumbers(self) -> np.ndarray:
        """Enteros ``k`` en orden FFT (la posición ``k mod Npts`` en cada eje)."""

        axis = np.fft.fftfreq(self.npts, d=1.0 / self.npts)
        grids = np.meshgrid(*[axis] * self.dim, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def frequencies(self) -> np.ndarray:
        return self.frequency_spacing * self.wavenumbers()

    def band_ceiling(self) -> float:
        """Techo de banda por defecto ``Npts·π/(2L)`` de las comprobaciones de consistencia."""

        return self.npts * math.pi / (2.0 * self.length)

    def to_payload(self) -> dict[str, Any]:
        return {"dim": self.dim, "length": self.length, "npts": self.npts}


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Matriz densa por bloques ``(espacio × n)`` con pesos de traza por índice."""

    grid: GridSpec
    algebra: MatrixAlgebraSpec
    matrix: np.ndarray
    trace_weights: np.ndarray | None = None
    order_hint: float | None = None
    hermitian: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        side = self.grid.modes * self.algebra.n
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (side, side):
            raise ConfigurationError(f"Matriz de forma {matrix.shape}; se esperaba {(side, side)}.")
        object.__setattr__(self, "matrix", matrix)
        weights = (
            np.ones(side) if self.trace_weights is None else np.asarray(self.trace_weights, float)
        )
        if weights.shape != (side,) or np.any(weights < 0):
            raise ConfigurationError("Los pesos de traza deben ser no negativos, uno por índice.")
        object.__setattr__(self, "trace_weights", weights)
        if self.hermitian and not self.is_hermitian():
            raise DomainError(f"El operador '{self.label}' se declaró hermítico y no lo es.")

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = _HERMITIAN_TOL) -> bool:
        scale = np.linalg.norm(self.matrix)
        return bool(np.linalg.norm(self.matrix - self.matrix.conj().T) <= tol * max(scale, 1e-300))

    def _like(self, matrix: np.ndarray, **changes: Any) -> DiscretizedOperator:
        changes.setdefault("hermitian", False)
        return replace(self, matrix=matrix, **changes)

    def _check_compatible(self, other: DiscretizedOperator) -> None:
        if self.grid != other.grid or self.algebra != other.algebra:
            raise ConfigurationError("Los operadores viven en mallas o álgebras distintas.")

    def __matmul__(self, other: DiscretizedOperator) -> DiscretizedOperator:
        self._check_compatible(other)
        order = None
        if self.order_hint is not None and other.order_hint is not None:
            order = self.order_hint + other.order_hint
        return self._like(self.matrix @ other.matrix, order_hint=order, label="")

    def __add__(self, other: DiscretizedOperator) -> DiscretizedOperator:
        self._check_compatible(other)
        return self._like(self.matrix + other.matrix, label="")

    def __sub__(self, other: DiscretizedOperator) -> DiscretizedOperator:
        self._check_compatible(other)
        return self._like(self.matrix - other.matrix, label="")

    def scaled(self, factor: complex) -> DiscretizedOperator:
        return self._like(self.matrix * factor)

    def shifted(self, rho: float) -> DiscretizedOperator:
        """``A + ρ``."""

        return self._like(self.matrix + rho * np.eye(self.side), hermitian=self.hermitian)

    def adjoint(self) -> DiscretizedOperator:
        return self._like(self.matrix.conj().T, hermitian=self.hermitian)

    def hermitian_part(self) -> DiscretizedOperator:
        half = 0.5 * (self.matrix + self.matrix.conj().T)
        return self._like(half, hermitian=True)

    def with_weights(self, weights: Any) -> DiscretizedOperator:
        weights = np.broadcast_to(np.asarray(weights, float), (self.side,))
        return replace(self, trace_weights=weights)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Aplica el operador a muestras ``(P, n)`` (o al vector aplanado)."""

        values = np.asarray(values, dtype=complex)
        flat = values.reshape(self.side)
        return (self.matrix @ flat).reshape(values.shape)

    def weighted_trace(self) -> complex:
        return complex(np.sum(self.trace_weights * np.diag(self.matrix)))

    def kernel_diagonal(self) -> np.ndarray:
        """Núcleo discretizado en la diagonal ``K(x_j, x_j) ≈ A[(j,·),(j,·)]/h^d``."""

        n = self.algebra.n
        blocks = self.matrix.reshape(self.grid.modes, n, self.grid.modes, n)
        diagonal = np.einsum("jajb->jab", blocks)
        return diagonal / self.grid.cell_volume

    def band_limited(self, ceiling: float) -> DiscretizedOperator:
        """``Π A Π`` con ``Π`` el proyector sobre ``|ξ| <= ceiling``."""

        projector = band_projector(self.grid, ceiling, self.algebra.n)
        return self._like(projector.matrix @ self.matrix @ projector.matrix)

    def header(self) -> dict[str, Any]:
        return {
            "grid": self.grid.to_payload(),
            "algebra": {"n": self.algebra.n, "trace_convention": self.algebra.trace_convention},
            "trace_weights": self.trace_weights.tolist(),
            "order_hint": self.order_hint,
            "hermitian": self.hermitian,
            "label": self.label,
        }


def _check_geometry(support: Box | None, grid: GridSpec) -> None:
    if support is None:
        return
    if support.dim != grid.dim:
        raise GeometryError(
            f"Soporte de dimensión {support.dim} en un toro de dimensión {grid.dim}."
        )
    if not support.inside(grid.length / 4.0):
        raise GeometryError(
            f"El soporte {support.to_payload()} no cabe en [-L/4, L/4]^d con L={grid.length}; "
            "el margen L/4 evita el solapamiento periódico."
        )


def _chunks(total: int, size: int) -> list[slice]:
    return [slice(start, min(start + size, total)) for start in range(0, total, size)]


def quantize(
    symbol: ClassicalSymbol,
    grid: GridSpec,
    workers: int | None = None,
    rows_per_chunk: int = 64,
    label: str | None = None,
) -> DiscretizedOperator:
    """Cuantización de Kohn–Nirenberg de ``σ`` sobre el toro ``grid``."""

    if symbol.dim != grid.dim:
        raise ConfigurationError(
            f"Símbolo de dimensión {symbol.dim} en malla de dimensión {grid.dim}."
        )
    _check_geometry(symbol.support, grid)
    n = symbol.algebra.n
    order = symbol.real_order if symbol.order.imag == 0 else None
    name = label if label is not None else symbol.name
    if not symbol.x_dependent:
        origin = np.zeros(grid.dim)

        def multiplier(xi: np.ndarray) -> np.ndarray:
            return evaluate_symbol(symbol, origin, xi)

        operator = fourier_multiplier(multiplier, grid, n=n, label=name)
        return replace(operator, algebra=symbol.algebra, order_hint=order)

    points = grid.points()
    freqs = grid.frequencies()
    sign = np.where(np.sum(grid.wavenumbers(), axis=-1).astype(int) % 2, -1.0, 1.0)
    modes = grid.modes
    axes = tuple(range(1, grid.dim + 1))
    matrix = np.empty((modes * n, modes * n), dtype=complex)

    def fill(rows: slice) -> None:
        x = points[rows]
        values = evaluate_symbol(symbol, x[:, None, :], freqs[None, :, :])
        phase = np.exp(1j * (x @ freqs.T)) * sign[None, :]
        folded = (values * phase[..., None, None]).reshape(
            (len(x),) + (grid.npts,) * grid.dim + (n, n)
        )
        block = fft.fftn(folded, axes=axes) / modes
        block = block.reshape(len(x), modes, n, n).transpose(0, 2, 1, 3)
        matrix[rows.start * n : rows.stop * n] = block.reshape(len(x) * n, modes * n)

    chunks = _chunks(modes, rows_per_chunk)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fill, chunks))
    LOGGER.debug("Cuantizado '%s' en %d bloques (lado %d)", name, len(chunks), modes * n)
    return DiscretizedOperator(grid, symbol.algebra, matrix, order_hint=order, label=name)


def _matrix_values(values: Any, count: int, n: int | None) -> np.ndarray:
    array = np.asarray(values, dtype=complex)
    if array.ndim == 1:
        array = array.reshape(count, 1, 1)
    if array.ndim != 3 or array.shape[0] != count or array.shape[-1] != array.shape[-2]:
        raise ConfigurationError(f"Valores de forma {array.shape} para {count} nodos.")
    if array.shape[-2:] == (1, 1) and n is not None and n > 1:
        array = array * np.eye(n)
    if n is not None and array.shape[-1] != n:
        raise ConfigurationError(f"Valores {array.shape[-1]}×{array.shape[-1]}; se esperaba n={n}.")
    return array


def _block_circulant_index(grid: GridSpec) -> np.ndarray:
    index = grid.indices()
    flat = np.zeros((grid.modes, grid.modes), dtype=np.int64)
    for axis in range(grid.dim):
        column = index[:, axis]
        diff = np.mod(column[:, None] - column[None, :], grid.npts)
        flat = flat * grid.npts + diff
    return flat


def fourier_multiplier(
    symbol: Callable[[np.ndarray], Any],
    grid: GridSpec,
    n: int | None = None,
    label: str = "",
    order_hint: float | None = None,
) -> DiscretizedOperator:
    """``T_φ``: diagonal en la base de Fourier con entradas ``φ(ξ_k)`` (``φ(0)`` en el modo 0)."""

    freqs = grid.frequencies()
    values = _matrix_values(symbol(freqs), grid.modes, n)
    size = values.shape[-1]
    folded = values.reshape((grid.npts,) * grid.dim + (size, size))
    kernel = fft.ifftn(folded, axes=tuple(range(grid.dim))).reshape(grid.modes, size, size)
    matrix = np.empty((grid.modes * size, grid.modes * size), dtype=complex)
    if grid.dim == 1:
        for a in range(size):
            for b in range(size):
                matrix[a::size, b::size] = linalg.circulant(kernel[:, a, b])
    else:
        flat = _block_circulant_index(grid)
        for a in range(size):
            for b in range(size):
                matrix[a::size, b::size] = kernel[:, a, b][flat]
    return DiscretizedOperator(
        grid, MatrixAlgebraSpec(size), matrix, order_hint=order_hint, label=label
    )


def multiplication_op(
    function: Callable[[np.ndarray], Any], grid: GridSpec, n: int | None = None, label: str = ""
) -> DiscretizedOperator:
    """``M_f``: diagonal por bloques con ``f(x_j)``."""

    values = _matrix_values(function(grid.points()), grid.modes, n)
    size = values.shape[-1]
    support = getattr(function, "support", None)
    _check_geometry(support, grid)
    matrix = np.zeros((grid.modes * size, grid.modes * size), dtype=complex)
    base = np.arange(grid.modes)[:, None, None] * size
    rows = base + np.arange(size)[None, :, None]
    cols = base + np.arange(size)[None, None, :]
    matrix[rows, cols] = values
    return DiscretizedOperator(grid, MatrixAlgebraSpec(size), matrix, order_hint=0.0, label=label)


def commutator(first: DiscretizedOperator, second: DiscretizedOperator) -> DiscretizedOperator:
    """``AB - BA``."""

    first._check_compatible(second)
    matrix = first.matrix @ second.matrix - second.matrix @ first.matrix
    order = None
    if first.order_hint is not None and second.order_hint is not None:
        order = first.order_hint + second.order_hint - 1.0
    return DiscretizedOperator(
        first.grid,
        first.algebra,
        matrix,
        first.trace_weights,
        order,
        label=f"[{first.label},{second.label}]",
    )


# ----------------------------------------------------------------------
# Multiplicadores integrados
# ----------------------------------------------------------------------
def _norm(xi: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(xi, dtype=float), axis=-1)


def bessel_potential(exponent: float) -> Callable[[np.ndarray], np.ndarray]:
    """``ξ ↦ (1+|ξ|²)^{s/2}`` (``J^{-m}`` con ``s = -m``)."""

    def multiplier(xi: np.ndarray) -> np.ndarray:
        return (1.0 + _norm(xi) ** 2) ** (exponent / 2.0)

    return multiplier


def homogeneous_power(exponent: float) -> Callable[[np.ndarray], np.ndarray]:
    """``ξ ↦ |ξ|^α`` con el modo cero a 0."""

    def multiplier(xi: np.ndarray) -> np.ndarray:
        radius = _norm(xi)
        safe = np.where(radius > 0, radius, 1.0)
        return np.where(radius > 0, safe**exponent, 0.0)

    return multiplier


def riesz_transform(axis: int) -> Callable[[np.ndarray], np.ndarray]:
    """``R_j``: ``ξ ↦ ξ_j/|ξ|`` con ``φ(0) = 0``."""

    return degree_zero_multiplier(lambda s: s[..., axis])


def degree_zero_multiplier(
    sphere_function: Callable[[np.ndarray], Any],
) -> Callable[[np.ndarray], np.ndarray]:
    """Extensión homogénea de grado 0 de una función sobre la esfera; 0 en ``ξ = 0``."""

    def multiplier(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        radius = _norm(xi)
        safe = np.where(radius[..., None] > 0, xi / np.maximum(radius, 1e-300)[..., None], 0.0)
        safe[..., 0] = np.where(radius > 0, safe[..., 0], 1.0)
        values = np.asarray(sphere_function(safe), dtype=complex)
        mask = (radius > 0).reshape(radius.shape + (1,) * (values.ndim - radius.ndim))
        return np.where(mask, values, 0.0)

    return multiplier


def band_projector(grid: GridSpec, ceiling: float, n: int = 1) -> DiscretizedOperator:
    def mask(xi: np.ndarray) -> np.ndarray:
        return (_norm(xi) <= ceiling).astype(float)

    operator = fourier_multiplier(mask, grid, n=n, label=f"Π_{ceiling:g}")
    return replace(operator, hermitian=True)


# ----------------------------------------------------------------------
# Exportación binaria
# ----------------------------------------------------------------------
def save_operator(operator: DiscretizedOperator, path: Path | str) -> Path:
    """Cabecera ``<Q`` con su longitud, cabecera JSON UTF-8 y matriz complex128 por filas."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps(operator.header(), ensure_ascii=False).encode("utf-8")
    with target.open("wb") as handle:
        handle.write(_HEADER.pack(len(header)))
        handle.write(header)
        handle.write(np.ascontiguousarray(operator.matrix, dtype="<c16").tobytes(order="C"))
    LOGGER.debug("Operador '%s' exportado a %s", operator.label, target)
    return target


def load_operator(path: Path | str) -> DiscretizedOperator:
    source = Path(path)
    try:
        raw = source.read_bytes()
        (length,) = _HEADER.unpack_from(raw, 0)
        start = _HEADER.size
        header = json.loads(raw[start : start + length].decode("utf-8"))
    except (OSError, struct.error, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"No se pudo leer el operador {source}: {exc}") from exc
    grid = GridSpec(**header["grid"])
    algebra = MatrixAlgebraSpec(**header["algebra"])
    side = grid.modes * algebra.n
    payload = np.frombuffer(raw, dtype="<c16", offset=start + length)
    if payload.size != side * side:
        raise ConfigurationError(
            f"El fichero {source} contiene {payload.size} entradas; se esperaban {side * side}."
        )
    return DiscretizedOperator(
        grid,
        algebra,
        payload.reshape(side, side).astype(complex),
        np.asarray(header["trace_weights"], dtype=float),
        header.get("order_hint"),
        bool(header.get("hermitian", False)),
        header.get("label", ""),
    )


__all__ = [
    "DEFAULT_NPTS",
    "DiscretizedOperator",
    "GridSpec",
    "band_projector",
    "bessel_potential",
    "commutator",
    "degree_zero_multiplier",
    "fourier_multiplier",
    "homogeneous_power",
    "load_operator",
    "multiplication_op",
    "quantize",
    "riesz_transform",
    "save_operator",
]
