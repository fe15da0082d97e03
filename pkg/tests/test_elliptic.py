"""Pruebas de elipticidad, parametriz y símbolos del resolvente."""

from __future__ import annotations

import numpy as np
import pytest

from weyl_lab.elliptic import (
    KeyholeSpec,
    check_ellipticity,
    empirical_resolvent_threshold,
    parametrix,
    require_elliptic,
    require_positive,
    resolvent_symbols,
)
from weyl_lab.errors import DomainError, EllipticityError
from weyl_lab.quadrature import sphere_directions
from weyl_lab.symbols import (
    abs_power,
    compose_symbols,
    random_elliptic,
    sample_components,
    sample_space_points,
)


def test_positive_diagonal_symbol_reports_constants():
    report = check_ellipticity(abs_power(1.0, 1, matrix=[1.0, 4.0]))

    assert report.is_elliptic
    assert report.is_positive
    assert report.constant_C == pytest.approx(1.0)
    assert report.modulus_bound_C2 == pytest.approx(1.0)
    assert report.positivity_floor == pytest.approx(1.0)
    assert report.spectral_ceiling == pytest.approx(4.0)
    assert report.default_shift == pytest.approx(0.5)
    assert report.to_payload()["hermitian"] is True


def test_singular_principal_symbol_is_rejected():
    symbol = abs_power(1.0, 1, matrix=[1.0, 0.0])

    report = check_ellipticity(symbol)

    assert not report.is_elliptic
    assert report.offending_point is not None
    with pytest.raises(EllipticityError):
        require_elliptic(symbol)


def test_require_positive_rejects_indefinite_hermitian_symbols():
    with pytest.raises(EllipticityError):
        require_positive(abs_power(2.0, 1, matrix=[1.0, -1.0]))


def test_keyhole_contains_small_disc_and_negative_ray():
    keyhole = KeyholeSpec.from_report(check_ellipticity(abs_power(2.0, 2)))

    inside = keyhole.contains([0.1 + 0.1j, -50.0, -50.0 + 10.0j])
    outside = keyhole.contains([2.0, 5.0j])

    assert inside.all()
    assert not outside.any()


def test_keyhole_requires_a_positive_radius():
    with pytest.raises(DomainError):
        KeyholeSpec(0.0)


def test_parametrix_inverts_random_elliptic_symbol_degree_by_degree():
    symbol = random_elliptic(2, n=2, order=2.0, seed=7)
    inverse = parametrix(symbol, truncation=3)
    product = compose_symbols(inverse, symbol, truncation=3)
    x = sample_space_points(symbol, 6, seed=1)[:, None, :]
    u = sphere_directions(2, 6)[None, :, :]

    values = sample_components(product, x, u)

    assert complex(inverse.order) == -2.0
    np.testing.assert_allclose(values[0], np.broadcast_to(np.eye(2), values[0].shape), atol=1e-8)
    for value in values[1:]:
        assert float(np.max(np.abs(value))) < 1e-8


def test_parametrix_of_scalar_power_is_reciprocal():
    inverse = parametrix(abs_power(2.0, 1), truncation=2)
    x = np.zeros((1, 1))
    xi = np.array([[2.0]])

    assert inverse.components[0].value(x, xi)[0, 0, 0] == pytest.approx(0.25)
    assert abs(inverse.components[1].value(x, xi)[0, 0, 0]) < 1e-12


def test_resolvent_principal_term_is_inverse_of_shifted_symbol():
    terms = resolvent_symbols(abs_power(2.0, 1), -1.0, truncation=2)
    degree, principal = terms[0]

    value = principal.value(np.zeros((1, 1)), np.array([[2.0]]))[0, 0, 0]

    assert degree == pytest.approx(-2.0)
    assert value == pytest.approx(0.2)


def test_empirical_resolvent_threshold_on_positive_diagonal():
    matrix = np.diag([2.0, 3.0])
    t_values = [0.1, 1.0, 10.0]

    loose = empirical_resolvent_threshold(matrix, constant=0.95, t_values=t_values)
    tight = empirical_resolvent_threshold(matrix, constant=0.6, t_values=t_values)

    assert loose.threshold == pytest.approx(0.1)
    np.testing.assert_allclose(loose.ratios, [1.1 / 2.1, 2.0 / 3.0, 11.0 / 12.0])
    assert tight.threshold is None


def test_parametrix_is_also_a_right_inverse():
    symbol = random_elliptic(2, n=2, order=1.0, seed=9)
    inverse = parametrix(symbol, truncation=3)
    product = compose_symbols(symbol, inverse, truncation=3)
    x = sample_space_points(symbol, 6, seed=2)[:, None, :]
    u = sphere_directions(2, 6)[None, :, :]

    values = sample_components(product, x, u)

    np.testing.assert_allclose(values[0], np.broadcast_to(np.eye(2), values[0].shape), atol=1e-8)
    for value in values[1:]:
        assert float(np.max(np.abs(value))) < 1e-8


def test_resolvent_terms_are_jointly_homogeneous_in_frequency_and_spectral_parameter():
    symbol = random_elliptic(2, n=2, order=2.0, seed=5)
    x = sample_space_points(symbol, 3, seed=2)[:, None, :]
    xi = 1.5 * sphere_directions(2, 4)[None, :, :]
    lam, t = -0.7 + 0.4j, 2.0

    base = resolvent_symbols(symbol, lam, truncation=3)
    scaled = resolvent_symbols(symbol, t**2 * lam, truncation=3)

    for (degree, part), (_, scaled_part) in zip(base, scaled):
        np.testing.assert_allclose(
            scaled_part.value(x, t * xi),
            t ** complex(degree) * part.value(x, xi),
            rtol=1e-8,
            atol=1e-12,
        )
