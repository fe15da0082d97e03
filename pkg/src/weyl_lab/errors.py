"""Jerarquía de errores compartida por los módulos numéricos de Weyl Lab."""

from __future__ import annotations

from typing import Any


class WeylLabError(RuntimeError):
    """Error base; la CLI lo traduce a estado de salida 1."""


class ConfigurationError(WeylLabError):
    """Parámetros o dimensiones incompatibles con el álgebra declarada."""


class ExperimentConfigError(ConfigurationError):
    """Archivo de experimento inválido; ``path`` es la ruta con puntos del campo culpable."""

    def __init__(self, message: str, path: str = "") -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class JetOrderError(WeylLabError):
    """Se pidió un jet de orden mayor que el disponible en una componente."""

    def __init__(self, required: int, available: int, label: str = "") -> None:
        self.required = required
        self.available = available
        where = f" en '{label}'" if label else ""
        super().__init__(
            f"Se requieren jets de orden {required}{where}, pero solo hay orden {available}."
        )


class EllipticityError(WeylLabError):
    """El símbolo principal no supera el certificado de elipticidad."""

    def __init__(self, message: str, report: Any) -> None:
        super().__init__(message)
        self.report = report


class SingularResolventError(WeylLabError):
    """El parámetro espectral toca el espectro de la matriz o del símbolo principal."""

    def __init__(self, message: str, location: Any = None) -> None:
        super().__init__(message)
        self.location = location


class DomainError(WeylLabError):
    """Entrada fuera del dominio de una operación (no hermítica, no positiva, etc.)."""


class GeometryError(WeylLabError):
    """Soporte espacial incompatible con el toro de discretización."""


class RangeError(WeylLabError):
    """Ventanas o parámetros numéricos fuera de rango."""


class FitError(WeylLabError):
    """Ajuste mal condicionado durante la extrapolación de residuos."""


class NumericalError(WeylLabError):
    """Fallo de una rutina de álgebra lineal."""


class DosError(WeylLabError):
    """Demasiadas muestras Monte Carlo descartadas en la densidad de estados."""


__all__ = [
    "ConfigurationError",
    "DomainError",
    "DosError",
    "EllipticityError",
    "ExperimentConfigError",
    "FitError",
    "GeometryError",
    "JetOrderError",
    "NumericalError",
    "RangeError",
    "SingularResolventError",
    "WeylLabError",
]
