"""Pruebas de potencias complejas: matrices, contorno de Dunford y símbolos."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import linalg

from weyl_lab.elliptic import parametrix
from weyl_lab.errors import DomainError, EllipticityError
from weyl_lab.powers import (
    DunfordContour,
    contour_power,
    lifted_power_symbol,
    matrix_power,
    modulus_trace,
    power_symbol,
    principal_modulus_power,
)
from weyl_lab.quadrature import sphere_directions
from weyl_lab.symbols import (
    abs_power,
    compose_symbols,
    random_elliptic,
    sample_components,
    sample_space_points,
)


@pytest.fixture()
def spd_matrix() -> np.ndarray:
    rng = np.random.default_rng(12)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    return q @ np.diag(np.geomspace(0.5, 40.0, 6)) @ q.T


def test_matrix_power_matches_scipy_fractional_power(spd_matrix):
    np.testing.assert_allclose(
        matrix_power(spd_matrix, 0.5), linalg.sqrtm(spd_matrix), rtol=1e-10, atol=1e-10
    )
    np.testing.assert_allclose(
        matrix_power(spd_matrix, -1), linalg.inv(spd_matrix), rtol=1e-10, atol=1e-10
    )


def test_matrix_power_rejects_non_positive_input():
    with pytest.raises(DomainError):
        matrix_power(np.diag([1.0, -1.0]), 0.5)
    with pytest.raises(DomainError):
        matrix_power(np.array([[1.0, 2.0], [0.0, 1.0]]), 0.5)


@pytest.mark.parametrize("z", [-0.5, -1.0, -0.25 + 0.75j])
def test_contour_power_agrees_with_spectral_power(spd_matrix, z):
    exact = matrix_power(spd_matrix, z)

    approx = contour_power(spd_matrix, z, nodes=64)

    assert linalg.norm(approx - exact) / linalg.norm(exact) <= 1e-6


def test_contour_power_requires_negative_real_part(spd_matrix):
    with pytest.raises(DomainError):
        contour_power(spd_matrix, 0.5)


def test_dunford_contour_enforces_minimum_node_count():
    with pytest.raises(DomainError):
        DunfordContour(nodes=16)


def test_power_symbol_of_scalar_power_is_a_power_of_the_norm():
    powered = power_symbol(abs_power(2.0, 1), -0.5, truncation=2)
    x = np.zeros((1, 1))
    xi = np.array([[3.0]])

    assert complex(powered.order) == pytest.approx(-1.0)
    assert powered.components[0].value(x, xi)[0, 0, 0] == pytest.approx(1.0 / 3.0, rel=1e-6)
    assert abs(powered.components[1].value(x, xi)[0, 0, 0]) < 1e-8


def test_positive_power_symbol_uses_lift():
    powered = power_symbol(abs_power(1.0, 1, matrix=[1.0, 4.0]), 0.5, truncation=1)
    x = np.zeros((1, 1))
    xi = np.array([[4.0]])

    assert powered.lift == 1
    np.testing.assert_allclose(
        powered.components[0].value(x, xi)[0], np.diag([2.0, 4.0]), rtol=1e-6, atol=1e-8
    )


def test_power_symbol_requires_positive_order():
    with pytest.raises(DomainError):
        power_symbol(abs_power(0.0, 1), -0.5)


def test_principal_modulus_power_and_modulus_trace():
    symbol = abs_power(1.0, 1, matrix=[1.0, 4.0])
    modulus = principal_modulus_power(symbol, -1.0)

    value = modulus(np.zeros((1, 1)), np.array([[2.0]]))

    np.testing.assert_allclose(value[0], np.diag([0.5, 0.125]), atol=1e-12)
    assert modulus_trace(np.diag([3.0, -4.0]), 1.0) == pytest.approx(7.0)


def test_lifted_power_symbol_composes_with_the_base():
    symbol = abs_power(1.0, 1, matrix=[1.0, 4.0])

    lifted = lifted_power_symbol(symbol, 0.5, 1, truncation=1)
    value = lifted(np.zeros((1, 1)), np.array([[4.0]]))

    assert lifted.lift == 1
    np.testing.assert_allclose(value[0], np.diag([2.0, 4.0]), rtol=1e-6, atol=1e-8)
    with pytest.raises(DomainError):
        lifted_power_symbol(symbol, 0.5, 0)


def test_contour_power_honours_the_tail_of_the_given_contour(spd_matrix):
    exact = matrix_power(spd_matrix, -0.25)

    with_tail = contour_power(spd_matrix, -0.25, contour=DunfordContour(tail_terms=3))
    without_tail = contour_power(spd_matrix, -0.25, contour=DunfordContour(tail_terms=0))

    assert linalg.norm(with_tail - exact) / linalg.norm(exact) <= 1e-6
    assert linalg.norm(without_tail - exact) / linalg.norm(exact) > 1e-4


def test_principal_modulus_power_requires_ellipticity():
    with pytest.raises(EllipticityError):
        principal_modulus_power(abs_power(1.0, 1, matrix=[1.0, 0.0]), -1.0)


def test_principal_modulus_power_squares_to_the_gram_matrix():
    symbol = random_elliptic(1, n=2, order=1.0, seed=4)
    x = np.array([[0.3]])
    xi = np.array([[1.5]])

    modulus = principal_modulus_power(symbol, 2.0)(x, xi)
    values = symbol.principal.value(x, xi)

    np.testing.assert_allclose(
        modulus, np.conj(np.swapaxes(values, -1, -2)) @ values, rtol=1e-10, atol=1e-10
    )


# ----------------------------------------------------------------------
# Símbolos de potencia con dependencia en x
# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def elliptic_symbol():
    return random_elliptic(1, n=2, order=2.0, seed=11)


@pytest.fixture(scope="module")
def sample_points(elliptic_symbol):
    x = sample_space_points(elliptic_symbol, 4, seed=3)
    u = sphere_directions(1, 2)
    return x[:, None, :], u[None, :, :]


def _component_gap(candidate, reference, x, u):
    ours = sample_components(candidate, x, u)
    theirs = sample_components(reference, x, u)
    scale = float(np.max(np.abs(theirs[0])))
    return max(float(np.max(np.abs(a - b))) for a, b in zip(ours, theirs)) / scale


def test_power_symbol_evaluates_lower_components_of_x_dependent_symbol(
    elliptic_symbol, sample_points
):
    x, u = sample_points

    values = sample_components(power_symbol(elliptic_symbol, -0.5, truncation=3).symbol, x, u)

    assert [value.shape for value in values] == [(4, 2, 2, 2)] * 3
    assert all(np.all(np.isfinite(value)) for value in values)
    assert np.max(np.abs(values[1])) > 1e-6


@pytest.mark.parametrize("z, w", [(-0.5, -0.5), (-1.3, 0.8), (2, -2)])
def test_power_symbols_satisfy_group_law(elliptic_symbol, sample_points, z, w):
    x, u = sample_points
    left = compose_symbols(
        power_symbol(elliptic_symbol, z, truncation=3).symbol,
        power_symbol(elliptic_symbol, w, truncation=3).symbol,
        3,
    )
    right = power_symbol(elliptic_symbol, complex(z) + complex(w), truncation=3).symbol

    assert _component_gap(left, right, x, u) <= 1e-6


def test_power_minus_one_matches_parametrix(elliptic_symbol, sample_points):
    x, u = sample_points

    inverse = power_symbol(elliptic_symbol, -1, truncation=3).symbol

    assert _component_gap(inverse, parametrix(elliptic_symbol, 3), x, u) <= 1e-6


def test_power_two_matches_self_composition(elliptic_symbol, sample_points):
    x, u = sample_points

    square = power_symbol(elliptic_symbol, 2, truncation=3)

    assert square.lift == 3
    reference = compose_symbols(elliptic_symbol, elliptic_symbol, 3)
    assert _component_gap(square.symbol, reference, x, u) <= 1e-6
