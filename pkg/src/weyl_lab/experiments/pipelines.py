"""Pipelines de los experimentos: construyen operadores, miden y comparan con la predicción."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping
from typing import Any

import numpy as np
from scipy import linalg

from ..config import CONFIG
from ..elliptic import parametrix
from ..errors import ExperimentConfigError, NumericalError
from ..powers import contour_power, matrix_power, power_symbol
from ..predictors import (
    Prediction,
    RandomModel,
    cz_commutator_build,
    dixmier_prediction,
    dos_estimate,
    dos_prediction,
    elliptic_weyl,
    expected_weyl,
    expected_weyl_cz,
    expected_weyl_frac,
    frac_commutator_build,
    microlocal_prediction,
)
from ..quadrature import Box, sphere_directions
from ..quantize import (
    DiscretizedOperator,
    GridSpec,
    band_projector,
    bessel_potential,
    degree_zero_multiplier,
    fourier_multiplier,
    multiplication_op,
    quantize,
)
from ..spectral import (
    dixmier_log_average,
    microlocal_counting_curve,
    singular_value_function,
    weyl_curve,
    weyl_limit,
)
from ..symbols import (
    ClassicalSymbol,
    abs_power,
    build_profile,
    build_symbol,
    compose_symbols,
    evaluate_symbol,
    sample_components,
    sample_space_points,
)
from ..zeta import (
    extrapolate_residue,
    multiplier_zeta_spectrum,
    residue_at_pole,
    spectrum_zeta_samples,
    symbolic_zeta_samples,
    zeta_spectrum,
)
from .types import ExperimentConfig, PipelineResult

LOGGER = logging.getLogger("weyl_lab.experiments")

DEFAULT_WINDOW = (0.02, 0.15)


# ----------------------------------------------------------------------
# Utilidades comunes
# ----------------------------------------------------------------------
def _grid(config: ExperimentConfig, support: Box | None) -> GridSpec:
    section = config.grid
    if section.length is not None:
        return GridSpec(section.dim, float(section.length), section.npts)
    if support is None:
        raise ExperimentConfigError(
            "se requiere 'length' cuando el experimento no tiene soporte compacto", "grid.length"
        )
    return GridSpec.for_support(support, section.npts)


def _symbol(config: ExperimentConfig) -> ClassicalSymbol:
    return build_symbol(config.symbol or {}, config.grid.dim)


def _profile(config: ExperimentConfig, n: int = 1) -> Any:
    return build_profile(config.profile or {}, config.grid.dim, n)


def _positive_operator(
    symbol: ClassicalSymbol, grid: GridSpec, config: ExperimentConfig, shift: float
) -> DiscretizedOperator:
    """Parte hermítica de la cuantización, desplazada por ``shift``."""

    operator = quantize(symbol, grid, workers=config.workers).hermitian_part()
    return operator.shifted(shift) if shift else operator


def _top_decade(grid: GridSpec, order: float, fraction: float, points: int) -> np.ndarray:
    """Malla de ``λ`` en la década superior resuelta por la malla de frecuencias."""

    top = (fraction * math.pi * grid.npts / grid.length) ** order
    return np.geomspace(top / 10.0, top, points)


def _weyl_result(
    operator: DiscretizedOperator,
    m: float,
    prediction: Prediction,
    parameters: Mapping[str, Any],
    **details: Any,
) -> PipelineResult:
    svf = singular_value_function(operator, driver=CONFIG.numerics.svd_driver)
    lower, upper = parameters.get("window") or DEFAULT_WINDOW
    window = (lower * svf.total_weight, upper * svf.total_weight)
    dim = operator.grid.dim
    estimate = weyl_limit(svf, m, dim, window)
    t, scaled = weyl_curve(svf, m, dim, window)
    LOGGER.info(
        "Weyl: medido %.6g, predicho %.6g (lado %d)",
        estimate.limit,
        prediction.value,
        operator.side,
    )
    return PipelineResult(
        predicted=prediction.value,
        measured=estimate.limit,
        header=("t", "scaled_mu"),
        rows=[(float(a), float(b)) for a, b in zip(t, scaled)],
        details={
            "estimate": estimate.to_payload(),
            "prediction": prediction.to_payload(),
            "grid": operator.grid.to_payload(),
            "matrix_side": operator.side,
            **details,
        },
    )


# ----------------------------------------------------------------------
# Leyes de Weyl
# ----------------------------------------------------------------------
def weyl_bessel(config: ExperimentConfig) -> PipelineResult:
    """``J^{-m} M_f`` frente a ``expected_weyl`` con ``σ_{-m} = |ξ|^{-m}``."""

    parameters = config.parameters
    dim = config.grid.dim
    m = float(parameters["order"])
    profile = _profile(config)
    grid = _grid(config, profile.support)
    potential = fourier_multiplier(
        bessel_potential(-m), grid, label=f"J^-{m:g}", order_hint=-m
    )
    operator = potential @ multiplication_op(profile, grid, label="M_f")
    prediction = expected_weyl(abs_power(-m, dim), profile)
    return _weyl_result(operator, m, prediction, parameters)


def weyl_elliptic(config: ExperimentConfig) -> PipelineResult:
    """``M_g p A^{-1} p M_g`` con ``A`` elíptico positivo y ``p`` una proyección constante."""

    parameters = config.parameters
    symbol = _symbol(config)
    n = symbol.algebra.n
    m = symbol.real_order
    projection = parameters.get("projection")
    p = np.eye(n, dtype=complex) if projection is None else np.asarray(projection, complex)
    localizer = _profile(config)
    grid = _grid(config, localizer.support)
    prediction = elliptic_weyl(symbol, localizer, p)
    base = _positive_operator(symbol, grid, config, float(parameters["shift"]))
    try:
        inverse_matrix = linalg.inv(base.matrix)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"No se pudo invertir el operador elíptico: {exc}") from exc
    inverse = DiscretizedOperator(grid, symbol.algebra, inverse_matrix, order_hint=-m)
    g = multiplication_op(localizer, grid, n=n, label="M_g")
    proj = multiplication_op(lambda x: np.broadcast_to(p, (len(x), n, n)), grid, n=n, label="p")
    operator = g @ proj @ inverse @ proj @ g
    return _weyl_result(operator, m, prediction, parameters, projection_rank=int(np.trace(p).real))


def dixmier(config: ExperimentConfig) -> PipelineResult:
    """Media logarítmica ``(1/log N)∫_0^N μ`` de ``J^{-d} M_f`` frente al valor de Dixmier.

    ``J^{-d} M_f`` es compactamente soportado por la derecha, así que el dominio se restringe
    a los nodos donde ``f ≠ 0`` y ``N`` se mide en fracciones de ese peso.
    """

    parameters = config.parameters
    dim = config.grid.dim
    profile = _profile(config)
    grid = _grid(config, profile.support)
    potential = fourier_multiplier(
        bessel_potential(-float(dim)), grid, label=f"J^-{dim}", order_hint=-float(dim)
    )
    operator = potential @ multiplication_op(profile, grid, label="M_f")
    mask = np.abs(profile.values(grid.points())).reshape(grid.modes, -1).max(axis=1) > 0
    svf = singular_value_function(
        operator, driver=CONFIG.numerics.svd_driver, columns=np.flatnonzero(mask)
    )
    total = svf.total_weight
    measured = dixmier_log_average(svf, float(parameters["fraction"]) * total)
    lower, upper = parameters["drift_window"]
    cutoffs = np.linspace(lower * total, upper * total, int(parameters["points"]))
    averages = np.array([dixmier_log_average(svf, float(n)) for n in cutoffs])
    drift = float(np.ptp(averages)) / max(abs(measured), 1e-300)
    tail = (svf.integral(upper * total) - svf.integral(lower * total)) / math.log(upper / lower)
    prediction = dixmier_prediction(abs_power(-float(dim), dim), right=profile)
    LOGGER.info(
        "Dixmier: medido %.6g, predicho %.6g, deriva %.3g (peso %.0f)",
        measured,
        prediction.value,
        drift,
        total,
    )
    rows = [
        (float(n), float(value), prediction.value) for n, value in zip(cutoffs, averages)
    ]
    return PipelineResult(
        predicted=prediction.value,
        measured=measured,
        header=("N", "log_average", "prediction"),
        rows=rows,
        details={
            "prediction": prediction.to_payload(),
            "support_weight": total,
            "tail_average": tail,
            "grid": grid.to_payload(),
        },
        checks={"drift": drift},
        limits={"drift": float(parameters["max_drift"])},
    )


def _axis_function(axis: int) -> Callable[[np.ndarray], np.ndarray]:
    def component(s: np.ndarray) -> np.ndarray:
        return np.asarray(s)[..., axis]

    return component


def weyl_commutator_cz(config: ExperimentConfig) -> PipelineResult:
    """``[R_j, M_f]`` (transformada de Riesz) frente a ``expected_weyl_cz``."""

    parameters = config.parameters
    axis = int(parameters["axis"])
    sphere = _axis_function(axis)
    profile = _profile(config)
    grid = _grid(config, profile.support)
    operator = cz_commutator_build(sphere, profile, grid)
    prediction = expected_weyl_cz(sphere, profile, grid.dim)
    return _weyl_result(operator, 1.0, prediction, parameters, axis=axis)


def weyl_commutator_frac(config: ExperimentConfig) -> PipelineResult:
    """``[I^α, M_f]`` o ``[J^α, M_f]`` frente a ``expected_weyl_frac``."""

    parameters = config.parameters
    alpha = float(parameters["alpha"])
    potential = str(parameters["potential"])
    profile = _profile(config)
    grid = _grid(config, profile.support)
    operator = frac_commutator_build(alpha, profile, grid, potential)
    prediction = expected_weyl_frac(alpha, profile, grid.dim, potential)
    return _weyl_result(operator, 1.0 - alpha, prediction, parameters, alpha=alpha)


# ----------------------------------------------------------------------
# Residuos de zeta
# ----------------------------------------------------------------------
def zeta_residue(config: ExperimentConfig) -> PipelineResult:
    """Residuo extrapolado de ``ζ`` del operador y del símbolo frente a la forma cerrada."""

    parameters = config.parameters
    symbol = _symbol(config)
    m = symbol.real_order
    localizer = _profile(config, symbol.algebra.n)
    grid = _grid(config, localizer.support)
    pole = grid.dim / m
    z_values = [complex(pole + float(offset)) for offset in parameters["offsets"]]
    degree = parameters.get("degree")

    shift = float(parameters["shift"])
    if symbol.x_dependent:
        operator = _positive_operator(symbol, grid, config, shift)
        spectrum = zeta_spectrum(operator, localizer)
    else:
        spectrum = multiplier_zeta_spectrum(symbol, grid, localizer, shift)
    measured_samples = spectrum_zeta_samples(
        spectrum, grid.dim, m, z_values, cutoff=parameters["cutoff"], label=symbol.name
    )
    measured_fit = extrapolate_residue(measured_samples, degree)
    symbolic_samples = symbolic_zeta_samples(symbol, localizer, z_values)
    symbolic_fit = extrapolate_residue(symbolic_samples, degree)
    predicted = residue_at_pole(symbol, localizer).real

    scale = max(abs(predicted), 1e-300)
    measured_residue = float(measured_fit.residue.real)
    symbolic_residue = float(symbolic_fit.residue.real)
    rows = [
        (z.real, measured.real, symbolic.real)
        for z, measured, symbolic in zip(
            z_values, measured_samples.values, symbolic_samples.values
        )
    ]
    return PipelineResult(
        predicted=float(predicted),
        measured=measured_residue,
        header=("re_z", "operator_zeta", "symbolic_zeta"),
        rows=rows,
        details={
            "pole": pole,
            "cutoff": measured_samples.cutoff,
            "operator_fit": measured_fit.to_payload(),
            "symbolic_fit": symbolic_fit.to_payload(),
            "grid": grid.to_payload(),
        },
        checks={
            "symbolic_residue": abs(symbolic_residue - predicted) / scale,
            "operator_vs_symbolic": abs(measured_residue - symbolic_residue) / scale,
        },
    )


# ----------------------------------------------------------------------
# Comprobaciones del cálculo simbólico
# ----------------------------------------------------------------------
def _sample_grid(
    symbol: ClassicalSymbol, config: ExperimentConfig
) -> tuple[np.ndarray, np.ndarray]:
    parameters = config.parameters
    x = sample_space_points(symbol, int(parameters["samples"]), seed=config.seed)
    u = sphere_directions(symbol.dim, int(parameters["directions"]))
    return x[:, None, :], u[None, :, :]


def _component_errors(
    candidate: ClassicalSymbol, reference: ClassicalSymbol, x: np.ndarray, u: np.ndarray
) -> list[float]:
    """Error por grado relativo al tamaño de la componente principal de ``reference``."""

    ours = sample_components(candidate, x, u)
    theirs = sample_components(reference, x, u)
    scale = max(float(np.max(np.abs(theirs[0]))), 1e-300)
    return [float(np.max(np.abs(a - b))) / scale for a, b in zip(ours, theirs)]


def parametrix_check(config: ExperimentConfig) -> PipelineResult:
    """``b∘σ - 1`` a nivel de símbolo y su residuo de operador por bandas de frecuencia."""

    parameters = config.parameters
    truncation = int(parameters["truncation"])
    symbol = _symbol(config)
    n = symbol.algebra.n
    inverse = parametrix(symbol, truncation)
    product = compose_symbols(inverse, symbol, truncation)
    x, u = _sample_grid(symbol, config)
    values = sample_components(product, x, u)
    residuals = [float(np.max(np.abs(values[0] - np.eye(n))))]
    residuals += [float(np.max(np.abs(value))) for value in values[1:]]
    LOGGER.info("Residuos simbólicos de la parametriz: %s", residuals)

    grid = _grid(config, symbol.support)
    composed = quantize(inverse, grid, workers=config.workers) @ quantize(
        symbol, grid, workers=config.workers
    )
    remainder = composed.matrix - np.eye(composed.side)
    top = grid.band_ceiling()
    ceilings = [top / 2**k for k in reversed(range(int(parameters["levels"])))]
    rows = []
    for ceiling in ceilings:
        outer = band_projector(grid, ceiling, n).matrix
        shell = outer - band_projector(grid, ceiling / 2, n).matrix
        rows.append((ceiling, float(linalg.norm(shell @ remainder @ shell, 2))))
    decays = [
        rows[k - 1][1] / rows[k][1] if rows[k][1] > 0 else math.inf for k in range(1, len(rows))
    ]
    min_decay = float(parameters["min_decay"])
    LOGGER.info("Decaimiento por duplicación del residuo de operador: %s", decays)
    return PipelineResult(
        predicted=0.0,
        measured=max(residuals),
        header=("ceiling", "shell_residual"),
        rows=rows,
        details={
            "component_residuals": residuals,
            "operator_decay_per_doubling": decays,
            "min_decay": min_decay,
            "grid": grid.to_payload(),
        },
        checks={"decay_shortfall": max(0.0, min_decay - min(decays))},
        limits={"decay_shortfall": 0.0},
        comparison="absolute",
    )


def _random_positive_matrix(
    rng: np.random.Generator, size: int, condition: float
) -> np.ndarray:
    gaussian = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    unitary, _ = np.linalg.qr(gaussian)
    spectrum = 10.0 ** rng.uniform(0.0, math.log10(condition), size)
    matrix = (unitary * spectrum) @ unitary.conj().T
    return 0.5 * (matrix + matrix.conj().T)


def power_group_check(config: ExperimentConfig) -> PipelineResult:
    """Oráculo de contorno, ley de grupo simbólica y consistencia entera de las potencias."""

    parameters = config.parameters
    rng = np.random.default_rng(config.seed)
    exponent = complex(parameters["exponent"])
    nodes = int(parameters["nodes"])
    contour_errors = []
    semigroup_error = 0.0
    for index in range(int(parameters["matrices"])):
        matrix = _random_positive_matrix(
            rng, int(parameters["matrix_size"]), float(parameters["condition"])
        )
        exact = matrix_power(matrix, exponent)
        approx = contour_power(matrix, exponent, nodes)
        contour_errors.append(float(linalg.norm(approx - exact) / linalg.norm(exact)))
        if index == 0:
            product = contour_power(matrix, -0.3, nodes) @ contour_power(matrix, -0.7, nodes)
            target = linalg.inv(matrix)
            semigroup_error = float(linalg.norm(product - target) / linalg.norm(target))

    truncation = int(parameters["truncation"])
    symbol = _symbol(config)
    x, u = _sample_grid(symbol, config)
    rows: list[tuple[str, float, float, float]] = []
    group_error = 0.0
    for z, w in parameters["pairs"]:
        left = compose_symbols(
            power_symbol(symbol, z, truncation).symbol,
            power_symbol(symbol, w, truncation).symbol,
            truncation,
        )
        right = power_symbol(symbol, complex(z) + complex(w), truncation).symbol
        errors = _component_errors(left, right, x, u)
        group_error = max(group_error, max(errors))
        rows.append(("group_law", float(z), float(w), max(errors)))

    inverse_error = max(
        _component_errors(
            power_symbol(symbol, -1, truncation).symbol, parametrix(symbol, truncation), x, u
        )
    )
    square_error = max(
        _component_errors(
            power_symbol(symbol, 2, truncation).symbol,
            compose_symbols(symbol, symbol, truncation),
            x,
            u,
        )
    )
    rows.append(("parametrix", -1.0, 0.0, inverse_error))
    rows.append(("square", 2.0, 0.0, square_error))
    rows.append(("contour_oracle", exponent.real, exponent.imag, max(contour_errors)))
    rows.append(("semigroup", -0.3, -0.7, semigroup_error))
    checks = {
        "contour_oracle": max(contour_errors),
        "semigroup": semigroup_error,
        "group_law": group_error,
        "parametrix": inverse_error,
        "square": square_error,
    }
    return PipelineResult(
        predicted=0.0,
        measured=max(checks.values()),
        header=("check", "z", "w", "relative_error"),
        rows=rows,
        details={"matrices": len(contour_errors)},
        checks=checks,
        comparison="absolute",
    )


# ----------------------------------------------------------------------
# Conteo microlocal y densidad de estados
# ----------------------------------------------------------------------
def _observable(
    parameters: Mapping[str, Any], grid: GridSpec, n: int
) -> tuple[DiscretizedOperator | None, Callable[[np.ndarray, np.ndarray], np.ndarray] | None]:
    if parameters["observable"] == "identity":
        return None, None
    axis = int(parameters["axis"])
    operator = fourier_multiplier(
        degree_zero_multiplier(lambda s: s[..., axis] ** 2), grid, n=n, label="R_j²"
    )

    def principal(x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return (np.asarray(u)[..., axis] ** 2)[..., None, None] * np.eye(n)

    return operator, principal


def microlocal_count(config: ExperimentConfig) -> PipelineResult:
    """``λ^{-d/m}·Tr(M_φ Q χ_{[0,λ]}(A))`` en la década superior frente a la constante."""

    parameters = config.parameters
    symbol = _symbol(config)
    n = symbol.algebra.n
    m = symbol.real_order
    localizer = _profile(config, n)
    grid = _grid(config, localizer.support)
    d = grid.dim
    operator = quantize(symbol, grid, workers=config.workers).hermitian_part()
    observable, principal = _observable(parameters, grid, n)
    localizer_op = multiplication_op(localizer, grid, n=n, label="M_φ")
    lambdas = _top_decade(
        grid, m, float(parameters["band_fraction"]), int(parameters["points"])
    )
    counts = microlocal_counting_curve(operator, observable, localizer_op, lambdas)
    prediction = microlocal_prediction(symbol, localizer, 1.0, observable=principal)
    scaled = counts / lambdas ** (d / m)

    details: dict[str, Any] = {"prediction": prediction.to_payload(), "grid": grid.to_payload()}
    if not symbol.x_dependent and n == 1:
        # Conteo de la red con el símbolo exacto, sin cuantizar.
        frequencies = grid.frequencies()
        values = evaluate_symbol(symbol, np.zeros(d), frequencies)[:, 0, 0].real
        weights = np.ones(len(values))
        if principal is not None:
            norms = np.linalg.norm(frequencies, axis=-1)
            safe = np.where(norms > 0, norms, 1.0)
            weights = np.where(norms > 0, (frequencies[:, int(parameters["axis"])] / safe) ** 2, 0)
        mass = grid.cell_volume * float(np.sum(localizer.values(grid.points())[:, 0, 0].real))
        lattice = [
            float(np.sum(weights[(values >= 0) & (values <= lam)])) * mass / grid.volume
            for lam in lambdas
        ]
        details["lattice_constant"] = float(np.mean(np.asarray(lattice) / lambdas ** (d / m)))

    rows = [
        (float(lam), float(count), prediction.value * float(lam) ** (d / m))
        for lam, count in zip(lambdas, counts)
    ]
    return PipelineResult(
        predicted=prediction.value,
        measured=float(np.mean(scaled)),
        header=("lambda", "count", "prediction"),
        rows=rows,
        details=details,
    )


def _random_model(config: ExperimentConfig) -> RandomModel:
    model = dict(config.model or {})
    base = build_profile(model.pop("base", {}), config.grid.dim)
    return RandomModel(base=base, seed=config.seed, **model)


def dos_random(config: ExperimentConfig) -> PipelineResult:
    """Densidad de estados de ``A₀ + M_V`` con potencial aleatorio equivariante."""

    parameters = config.parameters
    symbol = _symbol(config)
    n = symbol.algebra.n
    m = symbol.real_order
    grid = _grid(config, None)
    d = grid.dim
    model = _random_model(config)
    free = quantize(symbol, grid, workers=config.workers).hermitian_part()
    identity = np.eye(n)

    def builder(potential: np.ndarray) -> DiscretizedOperator:
        diagonal = np.kron(np.diag(np.asarray(potential, dtype=float)), identity)
        return free + DiscretizedOperator(grid, free.algebra, diagonal, label="M_V")

    lambdas = _top_decade(
        grid, m, float(parameters["band_fraction"]), int(parameters["points"])
    )
    curve = dos_estimate(model, builder, lambdas, grid, workers=config.workers)
    constant = dos_prediction(symbol, 1.0)
    scaled = np.asarray(curve.mean) / lambdas ** (d / m)
    rows = [
        (lam, mean, err, constant * lam ** (d / m))
        for lam, mean, err in zip(curve.lambdas, curve.mean, curve.stderr)
    ]
    return PipelineResult(
        predicted=constant,
        measured=float(np.mean(scaled)),
        header=("lambda", "dos", "stderr", "prediction"),
        rows=rows,
        details={
            "model": model.to_payload(),
            "samples_used": curve.samples_used,
            "skipped": curve.skipped,
            "max_stderr": float(max(curve.stderr)),
            "grid": grid.to_payload(),
        },
    )


__all__ = [
    "dixmier",
    "dos_random",
    "microlocal_count",
    "parametrix_check",
    "power_group_check",
    "weyl_bessel",
    "weyl_commutator_cz",
    "weyl_commutator_frac",
    "weyl_elliptic",
    "zeta_residue",
]
