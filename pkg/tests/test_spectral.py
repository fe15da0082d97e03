"""Pruebas de funciones de valores singulares, límites de Weyl y conteo."""

from __future__ import annotations

import math

import numpy as np
import pytest

from weyl_lab.errors import ConfigurationError, DomainError, RangeError
from weyl_lab.quantize import DiscretizedOperator, GridSpec
from weyl_lab.spectral import (
    SingularValueFunction,
    check_submultiplicativity,
    dixmier_log_average,
    eigenvalue_functions,
    microlocal_counting,
    microlocal_counting_curve,
    singular_value_function,
    tauberian_duality_check,
    weak_quasinorm,
    weyl_limit,
)
from weyl_lab.symbols import MatrixAlgebraSpec

HARMONIC = SingularValueFunction.from_values(1.0 / np.arange(1, 10_001))


def _diagonal(values) -> DiscretizedOperator:
    grid = GridSpec(1, 2.0 * math.pi, len(values))
    return DiscretizedOperator(grid, MatrixAlgebraSpec(1), np.diag(values))


def test_singular_value_function_is_a_right_continuous_staircase():
    svf = SingularValueFunction.from_values([1.0, 3.0, 2.0])

    np.testing.assert_allclose(svf([0.0, 0.999, 1.0, 2.5, 3.0]), [3.0, 3.0, 2.0, 1.0, 0.0])
    assert svf.integral(1.5) == pytest.approx(4.0)
    assert float(svf.distribution(1.5)) == pytest.approx(2.0)


def test_singular_value_function_is_unitarily_invariant():
    rng = np.random.default_rng(4)
    grid = GridSpec(1, 1.0, 16)
    matrix = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    unitary, _ = np.linalg.qr(rng.standard_normal((16, 16)))
    algebra = MatrixAlgebraSpec(1)

    plain = singular_value_function(DiscretizedOperator(grid, algebra, matrix))
    rotated = singular_value_function(DiscretizedOperator(grid, algebra, unitary @ matrix))

    np.testing.assert_allclose(plain.values, rotated.values, rtol=1e-10)


def test_singular_values_require_uniform_weights():
    operator = _diagonal([1.0, 2.0, 3.0, 4.0]).with_weights([1.0, 2.0, 1.0, 1.0])

    with pytest.raises(ConfigurationError):
        singular_value_function(operator)


def test_merge_uses_one_over_sample_count_weights():
    first = SingularValueFunction.from_values([3.0, 1.0])
    second = SingularValueFunction.from_values([2.0, 0.5])

    merged = SingularValueFunction.merge([first, second])

    assert merged.total_weight == pytest.approx(2.0)
    np.testing.assert_allclose(merged.values, [3.0, 2.0, 1.0, 0.5])
    assert merged(0.75) == pytest.approx(2.0)


def test_weyl_limit_recovers_harmonic_constant():
    estimate = weyl_limit(HARMONIC, 1.0, 1, window=(2000.0, 4000.0))

    assert estimate.limit == pytest.approx(1.0, rel=1e-3)
    assert estimate.spread < 1e-3


def test_weyl_limit_rejects_windows_beyond_half_the_weight():
    with pytest.raises(RangeError):
        weyl_limit(HARMONIC, 1.0, 1, window=(100.0, 6000.0))


def test_weak_quasinorm_and_dixmier_average_of_harmonic_sequence():
    harmonic_sum = float(np.sum(1.0 / np.arange(1, 1001)))

    assert weak_quasinorm(HARMONIC, 1.0) == pytest.approx(1.0)
    assert dixmier_log_average(HARMONIC, 1000.0) == pytest.approx(harmonic_sum / math.log(1000))


def test_dixmier_average_rejects_n_beyond_total_weight():
    with pytest.raises(RangeError):
        dixmier_log_average(HARMONIC, 20_000.0)


def test_tauberian_duality_holds_for_regularly_varying_sequence():
    report = tauberian_duality_check(HARMONIC, 1.0)

    assert report.discrepancy <= 0.02
    assert report.distribution_limit == pytest.approx(1.0, rel=0.02)


def test_eigenvalue_functions_split_signs():
    positive, negative = eigenvalue_functions(_diagonal([3.0, -2.0, 1.0, 0.0]))

    np.testing.assert_allclose(positive.values, [3.0, 1.0])
    np.testing.assert_allclose(negative.values, [2.0])


def test_eigenvalue_functions_reject_non_hermitian_input():
    grid = GridSpec(1, 1.0, 2)
    operator = DiscretizedOperator(grid, MatrixAlgebraSpec(1), np.array([[0.0, 1.0], [0.0, 0.0]]))

    with pytest.raises(DomainError):
        eigenvalue_functions(operator)


def test_microlocal_counting_without_observable_counts_eigenvalues():
    operator = _diagonal([0.5, 1.5, 2.5, -1.0]).hermitian_part()

    assert microlocal_counting(operator, None, None, 2.0) == pytest.approx(2.0)


def test_microlocal_counting_curve_applies_the_localizer():
    operator = _diagonal([0.5, 1.5, 2.5, -1.0]).hermitian_part()
    localizer = _diagonal([1.0, 0.0, 1.0, 0.0])

    curve = microlocal_counting_curve(operator, None, localizer, [0.4, 1.0, 2.0, 3.0])

    np.testing.assert_allclose(curve, [0.0, 1.0, 1.0, 2.0], atol=1e-12)


def test_submultiplicativity_spot_check_on_random_matrices():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((24, 24))
    b = rng.standard_normal((24, 24))

    report = check_submultiplicativity(a, b, samples=200, seed=2)

    assert report.violations == 0


def test_domain_restriction_keeps_only_the_selected_columns():
    operator = _diagonal([1.0, 2.0, 3.0, 4.0])

    svf = singular_value_function(operator, columns=[0, 2])

    np.testing.assert_allclose(svf.values, [3.0, 1.0])
    assert svf.total_weight == pytest.approx(2.0)
    with pytest.raises(ConfigurationError):
        singular_value_function(operator, columns=[])


def test_weyl_limit_is_stable_under_smaller_order_perturbations():
    rng = np.random.default_rng(8)
    size = 1500
    k = np.arange(1, size + 1)
    left, _ = np.linalg.qr(rng.standard_normal((size, size)))
    right, _ = np.linalg.qr(rng.standard_normal((size, size)))
    base = np.diag(1.0 / k)
    perturbation = 0.1 * (left * (1.0 / k**2)) @ right.T
    grid = GridSpec(1, 2.0 * math.pi, size)
    algebra = MatrixAlgebraSpec(1)

    plain = weyl_limit(singular_value_function(DiscretizedOperator(grid, algebra, base)), 1.0, 1)
    perturbed = weyl_limit(
        singular_value_function(DiscretizedOperator(grid, algebra, base + perturbation)), 1.0, 1
    )

    assert plain.limit == pytest.approx(1.0, rel=0.05)
    assert perturbed.limit == pytest.approx(plain.limit, rel=0.02)
