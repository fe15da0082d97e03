"""Pruebas de la cuantización sobre el toro y de los operadores discretizados."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import linalg

from weyl_lab.errors import ConfigurationError, GeometryError
from weyl_lab.quantize import (
    DiscretizedOperator,
    GridSpec,
    band_projector,
    bessel_potential,
    commutator,
    fourier_multiplier,
    load_operator,
    multiplication_op,
    quantize,
    save_operator,
)
from weyl_lab.symbols import (
    MatrixAlgebraSpec,
    abs_power,
    adjoint_symbol,
    build_field,
    build_profile,
    compose_symbols,
    evaluate_symbol,
    multiplication_symbol,
    random_elliptic,
)


@pytest.fixture()
def grid() -> GridSpec:
    return GridSpec(1, 8.0, 32)


@pytest.fixture()
def bump():
    return build_profile({"kind": "bump", "center": [0.0], "radius": 1.0}, 1)


def test_grid_spec_rejects_odd_point_count():
    with pytest.raises(ConfigurationError):
        GridSpec(1, 1.0, 7)


def test_grid_points_and_frequencies_follow_torus_conventions(grid: GridSpec):
    points = grid.points()
    freqs = grid.frequencies()

    assert points.shape == (32, 1)
    assert points[0, 0] == pytest.approx(-4.0)
    assert grid.spacing == pytest.approx(0.25)
    assert freqs[1, 0] == pytest.approx(2.0 * math.pi / 8.0)
    assert freqs[-1, 0] == pytest.approx(-2.0 * math.pi / 8.0)


def test_fourier_multiplier_has_the_multiplier_values_as_eigenvalues():
    grid = GridSpec(1, 2.0 * math.pi, 8)
    operator = fourier_multiplier(bessel_potential(-2.0), grid)

    eigenvalues = np.sort(linalg.eigvalsh(operator.matrix))
    expected = np.sort(1.0 / (1.0 + grid.wavenumbers()[:, 0] ** 2))

    np.testing.assert_allclose(eigenvalues, expected, atol=1e-12)


def test_quantize_x_independent_symbol_is_a_fourier_multiplier(grid: GridSpec):
    symbol = abs_power(2.0, 1)
    operator = quantize(symbol, grid)

    expected = evaluate_symbol(symbol, np.zeros(1), grid.frequencies())[:, 0, 0].real
    eigenvalues = np.sort(linalg.eigvalsh(0.5 * (operator.matrix + operator.matrix.conj().T)))

    np.testing.assert_allclose(eigenvalues, np.sort(expected), atol=1e-9)


def test_quantize_acts_on_plane_waves_by_the_symbol(grid: GridSpec, bump):
    symbol = multiplication_symbol(bump)
    operator = quantize(symbol, grid)
    xi = grid.frequencies()[3]
    x = grid.points()
    wave = np.exp(1j * (x @ xi))

    result = operator.apply(wave)
    expected = evaluate_symbol(symbol, x, xi[None, :])[:, 0, 0] * wave

    np.testing.assert_allclose(result, expected, atol=1e-10)


def test_quantize_is_independent_of_the_worker_count(grid: GridSpec, bump):
    symbol = multiplication_symbol(bump)

    serial = quantize(symbol, grid, workers=1, rows_per_chunk=5)
    parallel = quantize(symbol, grid, workers=4, rows_per_chunk=5)

    assert np.array_equal(serial.matrix, parallel.matrix)


def test_quantize_rejects_support_outside_the_safe_margin(bump):
    small = GridSpec(1, 2.0, 16)

    with pytest.raises(GeometryError):
        quantize(multiplication_symbol(bump), small)


def test_multiplication_operators_commute(grid: GridSpec, bump):
    first = multiplication_op(bump, grid)
    second = multiplication_op(lambda x: np.cos(x[:, 0]), grid)

    assert np.allclose(commutator(first, second).matrix, 0.0)
    np.testing.assert_allclose(
        np.diag(first.matrix).real, bump.values(grid.points())[:, 0, 0].real
    )


def test_band_projector_is_an_orthogonal_projection(grid: GridSpec):
    projector = band_projector(grid, 3.0).matrix

    np.testing.assert_allclose(projector @ projector, projector, atol=1e-12)
    np.testing.assert_allclose(projector, projector.conj().T, atol=1e-12)
    rank = round(float(np.trace(projector).real))
    assert rank == int(np.sum(np.abs(grid.frequencies()[:, 0]) <= 3.0))


def test_hermitian_part_and_shift(grid: GridSpec):
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((grid.modes, grid.modes))
    operator = DiscretizedOperator(grid, MatrixAlgebraSpec(1), raw)

    shifted = operator.hermitian_part().shifted(2.0)

    assert shifted.is_hermitian()
    np.testing.assert_allclose(
        shifted.matrix, 0.5 * (raw + raw.T) + 2.0 * np.eye(grid.modes), atol=1e-12
    )


def test_kernel_diagonal_of_identity_is_inverse_cell_volume(grid: GridSpec):
    identity = DiscretizedOperator(grid, MatrixAlgebraSpec(1), np.eye(grid.modes))

    np.testing.assert_allclose(identity.kernel_diagonal()[:, 0, 0], 1.0 / grid.cell_volume)


def test_operator_export_preserves_matrix_and_metadata(tmp_path, grid: GridSpec, bump):
    operator = multiplication_op(bump, grid, n=2, label="M_f")

    restored = load_operator(save_operator(operator, tmp_path / "op.bin"))

    assert np.array_equal(restored.matrix, operator.matrix)
    assert restored.grid == grid
    assert restored.algebra.n == 2
    assert restored.label == "M_f"


def test_load_operator_reports_truncated_files(tmp_path, grid: GridSpec, bump):
    target = save_operator(multiplication_op(bump, grid), tmp_path / "op.bin")
    target.write_bytes(target.read_bytes()[:-16])

    with pytest.raises(ConfigurationError):
        load_operator(target)


# ----------------------------------------------------------------------
# Consistencia con el cálculo simbólico
# ----------------------------------------------------------------------
WAVE_GRID = GridSpec(1, 8.0, 64)


def _modulated(seed: int):
    wave = build_field({"kind": "wave", "wave": [2.0 * math.pi / WAVE_GRID.length]}, 1)
    return random_elliptic(1, n=2, order=1.5, seed=seed, modulation=wave)


def _shell_norm(matrix: np.ndarray) -> float:
    top = WAVE_GRID.band_ceiling()
    shell = band_projector(WAVE_GRID, top, 2).matrix - band_projector(WAVE_GRID, top / 2, 2).matrix
    return float(linalg.norm(shell @ matrix @ shell, 2))


def test_quantized_adjoint_approaches_adjoint_symbol_as_truncation_grows():
    symbol = _modulated(4)
    exact = quantize(symbol, WAVE_GRID).adjoint().matrix
    scale = _shell_norm(exact)

    errors = [
        _shell_norm(exact - quantize(adjoint_symbol(symbol, truncation=n), WAVE_GRID).matrix)
        / scale
        for n in (1, 2, 3)
    ]

    assert errors[0] > 1e-6
    assert errors[1] < 0.5 * errors[0]
    assert errors[2] < 0.5 * errors[1]


def test_quantized_product_approaches_composed_symbol_as_truncation_grows():
    a, b = _modulated(1), _modulated(2)
    exact = (quantize(a, WAVE_GRID) @ quantize(b, WAVE_GRID)).matrix
    scale = _shell_norm(exact)

    errors = [
        _shell_norm(exact - quantize(compose_symbols(a, b, truncation=n), WAVE_GRID).matrix)
        / scale
        for n in (1, 2, 3)
    ]

    assert errors[0] > 1e-6
    assert errors[1] < 0.5 * errors[0]
    assert errors[2] < 0.5 * errors[1]
