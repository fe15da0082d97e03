"""Pruebas de las predicciones en forma cerrada y de los modelos aleatorios."""

from __future__ import annotations

import math

import numpy as np
import pytest

from weyl_lab.errors import ConfigurationError, DomainError, DosError, GeometryError, RangeError
from weyl_lab.predictors import (
    RandomModel,
    check_fractional_hypothesis,
    cwikel_ratio,
    dixmier_prediction,
    dos_estimate,
    dos_prediction,
    elliptic_weyl,
    expected_weyl,
    expected_weyl_cz,
    expected_weyl_frac,
    frac_commutator_build,
    fractional_constant,
    microlocal_prediction,
    shift_couplings,
)
from weyl_lab.quantize import DiscretizedOperator, GridSpec, bessel_potential
from weyl_lab.symbols import MatrixAlgebraSpec, abs_power, build_profile


@pytest.fixture()
def unit_indicator():
    return build_profile({"kind": "indicator", "center": [0.5], "radius": 0.5}, 1)


def _bump(dim: int, scale: float = 1.0):
    return build_profile({"kind": "bump", "radius": 0.5, "scale": scale}, dim)


def test_expected_weyl_of_inverse_first_order_operator(unit_indicator):
    prediction = expected_weyl(abs_power(-1.0, 1), unit_indicator)

    assert prediction.value == pytest.approx(1.0 / math.pi, rel=1e-12)
    assert prediction.warning is None
    assert prediction.to_payload()["value"] == prediction.value


def test_expected_weyl_requires_negative_order(unit_indicator):
    with pytest.raises(DomainError):
        expected_weyl(abs_power(1.0, 1), unit_indicator)


def test_dixmier_prediction_of_order_minus_d(unit_indicator):
    prediction = dixmier_prediction(abs_power(-1.0, 1), unit_indicator)

    assert prediction.value == pytest.approx(1.0 / math.pi, rel=1e-12)


def test_elliptic_weyl_respects_the_projection(unit_indicator):
    symbol = abs_power(1.0, 1, matrix=[1.0, 4.0])

    projected = elliptic_weyl(symbol, unit_indicator, projection=[[1.0, 0.0], [0.0, 0.0]])
    full = elliptic_weyl(symbol, unit_indicator)

    assert projected.value == pytest.approx(1.0 / math.pi, rel=1e-10)
    assert full.value == pytest.approx(1.25 / math.pi, rel=1e-10)


def test_elliptic_weyl_rejects_non_projection(unit_indicator):
    symbol = abs_power(1.0, 1, matrix=[1.0, 4.0])

    with pytest.raises(ConfigurationError):
        elliptic_weyl(symbol, unit_indicator, projection=[[1.0, 1.0], [0.0, 0.0]])


def test_microlocal_prediction_scales_with_lambda(unit_indicator):
    prediction = microlocal_prediction(abs_power(2.0, 1), unit_indicator, 4.0)

    assert prediction.value == pytest.approx(2.0 / math.pi, rel=1e-12)
    assert microlocal_prediction(abs_power(2.0, 1), unit_indicator, -1.0).value == 0.0


@pytest.mark.parametrize("lam", [0.25, 1.0, 9.0])
def test_dos_prediction_for_the_laplacian_symbol(lam):
    assert dos_prediction(abs_power(2.0, 1), lam) == pytest.approx(math.sqrt(lam) / math.pi)


def test_dos_prediction_vanishes_below_zero():
    assert dos_prediction(abs_power(2.0, 1), -3.0) == 0.0


def test_fractional_hypothesis():
    check_fractional_hypothesis(0.5, 1, "riesz")
    check_fractional_hypothesis(-0.5, 2, "riesz")
    check_fractional_hypothesis(-3.0, 2, "bessel")
    for alpha, d, potential in [(-3.0, 2, "riesz"), (0.0, 2, "riesz"), (1.0, 1, "bessel")]:
        with pytest.raises(DomainError):
            check_fractional_hypothesis(alpha, d, potential)
    with pytest.raises(DomainError):
        check_fractional_hypothesis(0.5, 1, "yukawa")


def test_fractional_constant_closed_form():
    assert fractional_constant(0.5, 1) == pytest.approx(0.5 * (2.0 * math.pi) ** -0.5)
    assert fractional_constant(-0.5, 2) == pytest.approx(
        0.5 * 2.0 ** (-0.75) * (2.0 * math.pi) ** -1.5
    )


def test_fractional_prediction_is_homogeneous_in_the_profile():
    single = expected_weyl_frac(0.5, _bump(1), 1).value
    double = expected_weyl_frac(0.5, _bump(1, scale=2.0), 1).value

    assert single > 0
    assert double == pytest.approx(2.0 * single, rel=1e-10)


def test_cz_prediction_is_homogeneous_in_the_profile():
    def first_coordinate(s: np.ndarray) -> np.ndarray:
        return s[..., 0]

    single = expected_weyl_cz(first_coordinate, _bump(2), 2).value
    triple = expected_weyl_cz(first_coordinate, _bump(2, scale=3.0), 2).value

    assert single > 0
    assert triple == pytest.approx(3.0 * single, rel=1e-8)


def test_cz_prediction_requires_two_dimensions():
    with pytest.raises(DomainError):
        expected_weyl_cz(lambda s: s[..., 0], _bump(1), 1)


def test_fractional_commutator_is_anti_hermitian():
    grid = GridSpec(1, 4.0, 32)

    operator = frac_commutator_build(0.5, _bump(1), grid)

    assert operator.order_hint == pytest.approx(-0.5)
    assert np.abs(operator.matrix).max() > 0
    np.testing.assert_allclose(operator.matrix, -operator.matrix.conj().T, atol=1e-12)


def test_fractional_commutator_checks_the_hypothesis():
    with pytest.raises(DomainError):
        frac_commutator_build(-3.0, _bump(2), GridSpec(2, 4.0, 8))


def test_cwikel_ratio_reports_finite_norms():
    report = cwikel_ratio(_bump(1), bessel_potential(-1.0), 3.0, GridSpec(1, 4.0, 32))

    assert report.p == 3.0
    assert report.operator_norm > 0
    assert report.profile_norm > 0
    assert report.multiplier_norm > 0
    assert 0 < report.ratio < math.inf
    assert report.to_payload()["ratio"] == report.ratio


def test_cwikel_ratio_requires_p_above_two():
    with pytest.raises(RangeError):
        cwikel_ratio(_bump(1), bessel_potential(-1.0), 2.0, GridSpec(1, 4.0, 32))


# ----------------------------------------------------------------------
# Modelos aleatorios
# ----------------------------------------------------------------------
GRID = GridSpec(1, 8.0, 32)


def _model(**overrides) -> RandomModel:
    options = {"base": _bump(1), "sample_count": 8, "seed": 3}
    options.update(overrides)
    return RandomModel(**options)


def _diagonal_builder(potential: np.ndarray) -> DiscretizedOperator:
    return DiscretizedOperator(GRID, MatrixAlgebraSpec(1), np.diag(potential))


def test_random_model_rejects_unknown_law_and_empty_samples():
    with pytest.raises(ConfigurationError):
        _model(law="cauchy")
    with pytest.raises(ConfigurationError):
        _model(sample_count=0)


def test_random_model_requires_commensurate_lattice():
    with pytest.raises(GeometryError):
        _model(spacing=0.3).lattice(GRID)


def test_couplings_depend_only_on_seed_and_index():
    model = _model()

    first = model.couplings(GRID, 5)
    again = model.couplings(GRID, 5)
    others = [model.couplings(GRID, index) for index in range(6, 10)]

    assert first.shape == (8,)
    assert set(np.unique(first)) <= {-1.0, 1.0}
    assert np.array_equal(first, again)
    assert any(not np.array_equal(first, other) for other in others)


def test_quasi_periodic_couplings_follow_a_single_rounded_frequency():
    model = _model(law="quasi_periodic")

    couplings = model.couplings(GRID, 2)

    wave = round(model.frequency * 8) / 8
    assert np.all(np.abs(couplings) <= 1.0)
    np.testing.assert_allclose(
        couplings[2:] + couplings[:-2],
        2.0 * math.cos(2.0 * math.pi * wave) * couplings[1:-1],
        atol=1e-12,
    )
    assert np.array_equal(couplings, model.couplings(GRID, 2))


def test_potential_is_equivariant_under_lattice_shifts():
    model = _model()
    couplings = model.couplings(GRID, 0)
    _, stride = model.lattice(GRID)

    base = model.potential_from(GRID, couplings)
    shifted = model.potential_from(GRID, shift_couplings(couplings, (1,)))

    np.testing.assert_allclose(shifted, np.roll(base, -stride), atol=1e-12)


def test_dos_estimate_of_vanishing_potential():
    model = _model(law="deterministic")

    curve = dos_estimate(model, _diagonal_builder, [-1.0, 0.5], GRID, workers=2)

    assert curve.samples_used == 8
    assert curve.skipped == 0
    np.testing.assert_allclose(curve.mean, [0.0, 32 / 8.0])
    np.testing.assert_allclose(curve.stderr, [0.0, 0.0])


def test_dos_estimate_fails_when_too_many_samples_are_skipped():
    def failing(potential: np.ndarray) -> DiscretizedOperator:
        raise GeometryError("sin operador")

    with pytest.raises(DosError):
        dos_estimate(_model(), failing, [0.0], GRID, workers=1)


def test_dos_estimate_counts_only_the_non_negative_part_of_the_spectrum():
    spectrum = np.linspace(-1.0, 1.0, 32)

    def shifted(potential: np.ndarray) -> DiscretizedOperator:
        return DiscretizedOperator(GRID, MatrixAlgebraSpec(1), np.diag(spectrum))

    curve = dos_estimate(_model(), shifted, [-0.5, 0.5], GRID, workers=1)

    np.testing.assert_allclose(curve.mean, [0.0, 8 / 8.0])


def test_dos_standard_error_shrinks_like_inverse_square_root_of_samples():
    lambdas = [0.8]

    small = dos_estimate(_model(sample_count=32), _diagonal_builder, lambdas, GRID, workers=2)
    large = dos_estimate(_model(sample_count=128), _diagonal_builder, lambdas, GRID, workers=2)

    ratio = small.stderr[0] / large.stderr[0]
    assert small.stderr[0] > 0
    assert 1.4 < ratio < 2.8


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_expected_weyl_scales_like_dilation_to_the_order(m):
    narrow = build_profile({"kind": "bump", "radius": 0.5}, 2)
    wide = build_profile({"kind": "bump", "radius": 1.0}, 2)
    symbol = abs_power(-m, 2)

    ratio = expected_weyl(symbol, wide).value / expected_weyl(symbol, narrow).value

    assert ratio == pytest.approx(2.0**m, rel=1e-6)
