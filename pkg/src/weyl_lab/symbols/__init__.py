"""Cálculo simbólico clásico con símbolos matriciales."""

from .classical import (
    DEFAULT_TRUNCATION,
    ClassicalSymbol,
    MatrixAlgebraSpec,
    add_symbols,
    adjoint_symbol,
    component_residuals,
    compose_symbols,
    evaluate_symbol,
    sample_components,
    sample_space_points,
)
from .components import (
    AnalyticComponent,
    FiniteDifferenceComponent,
    HomogeneousComponent,
    ScaledComponent,
    SumComponent,
    ZeroComponent,
)
from .cutoff import CUTOFF, CutoffSpec
from .families import (
    SYMBOL_FAMILIES,
    abs_power,
    build_field,
    build_profile,
    build_symbol,
    classical_expansion_of_bessel,
    coefficient_abs_power,
    frequency_symbol,
    multiplication_symbol,
    random_elliptic,
    sphere_harmonic,
    x_times_xi,
)
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
from .jets import Jet

__all__ = [
    "AnalyticComponent",
    "Bump",
    "CUTOFF",
    "ClassicalSymbol",
    "Constant",
    "Coordinate",
    "Cosine",
    "CutoffSpec",
    "DEFAULT_TRUNCATION",
    "Field",
    "FiniteDifferenceComponent",
    "Frequency",
    "Gaussian",
    "HomogeneousComponent",
    "Indicator",
    "Jet",
    "MatrixAlgebraSpec",
    "Plateau",
    "SYMBOL_FAMILIES",
    "ScaledComponent",
    "SpatialProfile",
    "SumComponent",
    "ZeroComponent",
    "abs_power",
    "add_symbols",
    "adjoint_symbol",
    "build_field",
    "build_profile",
    "build_symbol",
    "classical_expansion_of_bessel",
    "coefficient_abs_power",
    "component_residuals",
    "compose_symbols",
    "direction",
    "evaluate_symbol",
    "frequency_power",
    "frequency_symbol",
    "multiplication_symbol",
    "random_elliptic",
    "sample_components",
    "sample_space_points",
    "sphere_harmonic",
    "x_times_xi",
]
