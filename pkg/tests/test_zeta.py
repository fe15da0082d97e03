"""Pruebas de las funciones zeta localizadas y de la extrapolación del residuo."""

from __future__ import annotations

import math

import numpy as np
import pytest

from weyl_lab.errors import DomainError, RangeError
from weyl_lab.quantize import DiscretizedOperator, GridSpec, quantize
from weyl_lab.symbols import MatrixAlgebraSpec, abs_power, build_profile, multiplication_symbol
from weyl_lab.zeta import (
    ZetaSample,
    auto_cutoff,
    default_z_values,
    extrapolate_residue,
    multiplier_zeta_spectrum,
    operator_zeta,
    operator_zeta_samples,
    residue_at_pole,
    spectrum_zeta_samples,
    symbolic_zeta,
    symbolic_zeta_samples,
    zeta_spectrum,
)

GRID = GridSpec(1, 2.0 * math.pi, 4)
ALGEBRA = MatrixAlgebraSpec(1)


@pytest.fixture()
def unit_indicator():
    return build_profile({"kind": "indicator", "center": [0.5], "radius": 0.5}, 1)


def _diagonal(values) -> DiscretizedOperator:
    return DiscretizedOperator(GRID, ALGEBRA, np.diag(values))


def test_extrapolation_recovers_residue_of_polynomial_model():
    zs = default_z_values(0.5)
    values = [(1.25 / (z - 0.5)) + 2.0 + (z - 0.5) for z in zs]

    fit = extrapolate_residue(ZetaSample(tuple(zs), tuple(values), 0.5))

    assert fit.residue == pytest.approx(1.25, abs=1e-10)
    assert fit.model == "poly3"
    assert fit.residual < 1e-10


def test_extrapolation_with_spectral_cutoff_model():
    cutoff = 400.0
    zs = default_z_values(1.0)
    values = [(0.7 * (1.0 - cutoff ** (-(z - 1.0))) + 0.3 * (z - 1.0)) / (z - 1.0) for z in zs]

    fit = extrapolate_residue(ZetaSample(tuple(zs), tuple(values), 1.0, cutoff))

    assert fit.residue == pytest.approx(0.7, abs=1e-8)
    assert fit.model.startswith("cutoff")
    assert fit.to_payload()["residue_re"] == pytest.approx(0.7, abs=1e-8)


def test_extrapolation_needs_four_samples():
    zs = default_z_values(1.0, [0.1, 0.2, 0.3])

    with pytest.raises(RangeError):
        extrapolate_residue(ZetaSample(tuple(zs), (1.0, 1.0, 1.0), 1.0))


def test_zeta_sample_rejects_points_left_of_the_pole():
    with pytest.raises(RangeError):
        ZetaSample((0.5 + 0j,), (1.0 + 0j,), 0.5)


def test_zeta_sample_exports_csv(tmp_path):
    zs = default_z_values(1.0, [0.5, 0.25])
    sample = ZetaSample(tuple(zs), (2.0 + 0j, 1.0 + 0.5j), 1.0)

    lines = sample.to_csv(tmp_path / "zeta.csv").read_text(encoding="utf-8").splitlines()

    assert lines[0] == "re_z,im_z,re_zeta,im_zeta"
    assert lines[2] == "1.25,0,1,0.5"


def test_residue_of_second_order_power_on_unit_interval(unit_indicator):
    residue = residue_at_pole(abs_power(2.0, 1), unit_indicator)

    assert residue.real == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)
    assert abs(residue.imag) < 1e-14


def test_symbolic_zeta_samples_extrapolate_to_the_residue(unit_indicator):
    symbol = abs_power(2.0, 1)
    zs = default_z_values(0.5, np.linspace(0.02, 0.1, 9))

    fit = extrapolate_residue(symbolic_zeta_samples(symbol, unit_indicator, zs))

    assert fit.residue.real == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-4)


def test_symbolic_zeta_diverges_left_of_the_pole(unit_indicator):
    with pytest.raises(DomainError):
        symbolic_zeta(abs_power(2.0, 1), unit_indicator, 0.4)


def test_operator_zeta_of_diagonal_operator():
    operator = _diagonal([1.0, 2.0, 4.0, 8.0])
    localizer = _diagonal([1.0, 0.0, 1.0, 0.0])

    assert operator_zeta(operator, None, 1.0) == pytest.approx(1.875)
    assert operator_zeta(operator, None, 1.0, cutoff=4.0) == pytest.approx(1.75)
    assert operator_zeta(operator, localizer, 1.0) == pytest.approx(1.25)


def test_operator_zeta_requires_positive_definite_operator():
    with pytest.raises(DomainError):
        operator_zeta(_diagonal([0.0, 1.0, 2.0, 3.0]), None, 1.0)


def test_operator_zeta_samples_apply_automatic_cutoff():
    operator = _diagonal([1.0, 2.0, 4.0, 8.0])

    samples = operator_zeta_samples(operator, None, 2.0)

    assert samples.pole == pytest.approx(0.5)
    assert samples.cutoff == pytest.approx(auto_cutoff(8.0, 2.0, 1))
    assert samples.cutoff == pytest.approx(0.81 * 8.0)
    assert len(samples.z_values) == 9


def test_multiplier_spectrum_matches_dense_diagonalization():
    grid = GridSpec(2, 8.0, 8)
    symbol = abs_power(2.0, 2, matrix=[1.0, 3.0])
    localizer = build_profile({"kind": "bump", "radius": 1.0}, 2, 2)
    dense = zeta_spectrum(quantize(symbol, grid).hermitian_part().shifted(1.0), localizer)

    fast = multiplier_zeta_spectrum(symbol, grid, localizer, shift=1.0)

    np.testing.assert_allclose(fast.eigenvalues, dense.eigenvalues, rtol=1e-10, atol=1e-12)
    for z in (1.2, 2.0, 3.5):
        assert fast(z) == pytest.approx(dense(z), rel=1e-9)


def test_multiplier_spectrum_rejects_x_dependent_symbols():
    profile = build_profile({"kind": "bump", "radius": 1.0}, 1)

    with pytest.raises(DomainError):
        multiplier_zeta_spectrum(multiplication_symbol(profile), GridSpec(1, 8.0, 16))


def test_operator_residue_agrees_with_symbolic_residue():
    grid = GridSpec(1, 8.0, 1024)
    symbol = abs_power(2.0, 1)
    localizer = build_profile({"kind": "bump", "radius": 1.0}, 1)
    spectrum = multiplier_zeta_spectrum(symbol, grid, localizer, shift=1.0)

    operator_fit = extrapolate_residue(spectrum_zeta_samples(spectrum, 1, 2.0))
    symbolic_fit = extrapolate_residue(
        symbolic_zeta_samples(symbol, localizer, default_z_values(0.5))
    )
    expected = residue_at_pole(symbol, localizer).real

    assert operator_fit.residue.real == pytest.approx(expected, rel=0.03)
    assert symbolic_fit.residue.real == pytest.approx(expected, rel=0.03)
