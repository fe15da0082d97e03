"""Predicciones en forma cerrada y constructores de conmutadores y modelos aleatorios."""

from .commutators import (
    CwikelReport,
    check_fractional_hypothesis,
    cwikel_ratio,
    cz_commutator_build,
    expected_weyl_cz,
    expected_weyl_frac,
    frac_commutator_build,
    fractional_constant,
)
from .random_models import DosCurve, RandomModel, dos_estimate, shift_couplings
from .weyl import (
    Prediction,
    dixmier_prediction,
    dos_prediction,
    elliptic_weyl,
    expected_weyl,
    microlocal_prediction,
)

__all__ = [
    "CwikelReport",
    "DosCurve",
    "Prediction",
    "RandomModel",
    "check_fractional_hypothesis",
    "cwikel_ratio",
    "cz_commutator_build",
    "dixmier_prediction",
    "dos_estimate",
    "dos_prediction",
    "elliptic_weyl",
    "expected_weyl",
    "expected_weyl_cz",
    "expected_weyl_frac",
    "frac_commutator_build",
    "fractional_constant",
    "microlocal_prediction",
    "shift_couplings",
]
