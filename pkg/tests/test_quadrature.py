"""Pruebas de cajas, cuadraturas producto y reglas esféricas."""

from __future__ import annotations

import math

import numpy as np
import pytest

from weyl_lab.errors import ConfigurationError
from weyl_lab.quadrature import (
    Box,
    box_intersection,
    box_rule,
    box_union,
    composite_gauss_legendre,
    refined_sphere_nodes,
    sphere_directions,
    sphere_rule,
    sphere_volume,
)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_sphere_rule_weights_add_up_to_sphere_measure(dim):
    points, weights = sphere_rule(dim)

    assert float(np.sum(weights)) == pytest.approx(sphere_volume(dim), rel=1e-12)
    np.testing.assert_allclose(np.linalg.norm(points, axis=-1), 1.0, atol=1e-12)


def test_sphere_measures_match_closed_forms():
    assert sphere_volume(1) == pytest.approx(2.0)
    assert sphere_volume(2) == pytest.approx(2.0 * math.pi)
    assert sphere_volume(3) == pytest.approx(4.0 * math.pi)


def test_circle_rule_integrates_trigonometric_polynomials():
    points, weights = sphere_rule(2, 32)

    assert float(np.sum(weights * points[:, 0] ** 2)) == pytest.approx(math.pi)
    assert abs(float(np.sum(weights * points[:, 0] * points[:, 1]))) < 1e-12


def test_lebedev_rule_requires_a_tabulated_size():
    with pytest.raises(ConfigurationError):
        sphere_rule(3, 51)


def test_refinement_ladder():
    assert refined_sphere_nodes(1, None) is None
    assert refined_sphere_nodes(2, 64) == 128
    assert refined_sphere_nodes(3, 50) == 86
    assert refined_sphere_nodes(3, 194) == 194


def test_box_rule_integrates_polynomials_exactly():
    box = Box((0.0, -1.0), (2.0, 1.0))

    points, weights = box_rule(box, 8)

    assert float(np.sum(weights)) == pytest.approx(box.volume)
    assert float(np.sum(weights * points[:, 0] ** 3 * points[:, 1] ** 2)) == pytest.approx(
        4.0 * 2.0 / 3.0
    )


def test_composite_gauss_legendre_on_smooth_integrand():
    t, w = composite_gauss_legendre(0.0, 10.0, 5, 16)

    assert float(np.sum(w * np.exp(-t))) == pytest.approx(1.0 - math.exp(-10.0), rel=1e-13)


def test_box_algebra():
    left = Box.cube(1, 1.0)
    right = Box((0.5,), (3.0,))

    assert box_union([left, right]) == Box((-1.0,), (3.0,))
    assert box_union([left, None]) is None
    assert box_intersection([left, None, right]) == Box((0.5,), (1.0,))
    assert left.inside(1.0)
    assert not right.inside(2.0)
    np.testing.assert_array_equal(left.contains(np.array([[0.0], [1.5]])), [True, False])


def test_box_rejects_inverted_bounds():
    with pytest.raises(ConfigurationError):
        Box((1.0,), (0.0,))


def test_sphere_directions_are_unit_vectors():
    directions = sphere_directions(3, 40)

    assert directions.shape == (40, 3)
    np.testing.assert_allclose(np.linalg.norm(directions, axis=-1), 1.0)
