"""Lectura estricta de los archivos de experimento (JSON UTF-8 por secciones)."""

from __future__ import annotations

import json
import logging
from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any

from ..config import CONFIG
from ..errors import DomainError, ExperimentConfigError
from ..predictors.commutators import POTENTIALS, check_fractional_hypothesis
from ..predictors.random_models import COUPLING_LAWS
from ..symbols import SYMBOL_FAMILIES, build_symbol
from .registry import REGISTRY, ExperimentRegistry
from .types import ExperimentConfig, ExperimentDefinition, GridSection, Tolerances

LOGGER = logging.getLogger("weyl_lab.experiments")

TOP_LEVEL_KEYS = frozenset(
    {"experiment", "seed", "output_dir", "grid", "symbol", "profile", "model", "parameters",
     "tolerances"}
)
GRID_KEYS = frozenset({"dim", "npts", "length"})
SYMBOL_KEYS = frozenset(
    {"family", "order", "matrix", "truncation", "n", "seed", "coefficient", "offset", "modulation"}
)
PROFILE_KEYS = frozenset(
    {"kind", "center", "radius", "width", "inner", "outer", "value", "wave", "phase", "matrix",
     "scale"}
)
PROFILE_KINDS = ("bump", "gaussian", "plateau", "indicator", "constant", "cosine", "wave")
MODEL_KEYS = frozenset({"law", "sample_count", "coupling", "spacing", "frequency", "base"})
TOLERANCE_KEYS = frozenset({"relative", "absolute"})
OBSERVABLES = ("identity", "direction_square")
MAX_SEED = 2**64 - 1


# ----------------------------------------------------------------------
# Validadores elementales
# ----------------------------------------------------------------------
def _mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ExperimentConfigError("se esperaba un objeto JSON", path)
    return value


def _check_keys(section: Mapping[str, Any], allowed: frozenset[str], path: str) -> None:
    for key in sorted(section):
        if key not in allowed:
            raise ExperimentConfigError("campo desconocido", f"{path}.{key}" if path else key)


def _number(
    value: Any,
    path: str,
    minimum: float | None = None,
    maximum: float | None = None,
    exclusive: bool = False,
) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ExperimentConfigError(f"se esperaba un número (recibido {value!r})", path)
    number = float(value)
    if minimum is not None and (number <= minimum if exclusive else number < minimum):
        relation = ">" if exclusive else ">="
        raise ExperimentConfigError(f"debe ser {relation} {minimum:g} (recibido {value})", path)
    if maximum is not None and number > maximum:
        raise ExperimentConfigError(f"debe ser <= {maximum:g} (recibido {value})", path)
    return number


def _integer(value: Any, path: str, minimum: int | None = None, maximum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ExperimentConfigError(f"se esperaba un entero (recibido {value!r})", path)
    _number(value, path, minimum, maximum)
    return value


def _choice(value: Any, options: tuple[str, ...] | Mapping[str, Any], path: str) -> str:
    if value not in options:
        raise ExperimentConfigError(f"'{value}' no es uno de {sorted(options)}", path)
    return str(value)


def _number_list(value: Any, path: str, length: int | None = None) -> list[float]:
    if not isinstance(value, list) or (length is not None and len(value) != length):
        expected = f" de longitud {length}" if length is not None else ""
        raise ExperimentConfigError(f"se esperaba una lista{expected}", path)
    return [_number(item, f"{path}[{i}]") for i, item in enumerate(value)]


# ----------------------------------------------------------------------
# Secciones
# ----------------------------------------------------------------------
def _grid(payload: Any, definition: ExperimentDefinition) -> GridSection:
    section = _mapping(payload, "grid")
    _check_keys(section, GRID_KEYS, "grid")
    if "dim" not in section or "npts" not in section:
        raise ExperimentConfigError("se requieren 'dim' y 'npts'", "grid")
    dim = _integer(section["dim"], "grid.dim", max(1, definition.min_dim), 3)
    npts = _integer(section["npts"], "grid.npts", 2)
    if npts % 2:
        raise ExperimentConfigError(f"debe ser par (recibido {npts})", "grid.npts")
    length = section.get("length")
    if length is not None:
        length = _number(length, "grid.length", 0.0, exclusive=True)
    return GridSection(dim, npts, length)


def _check_size(
    grid: GridSection, definition: ExperimentDefinition, symbol: Mapping[str, Any] | None
) -> None:
    """Limita el lado de las matrices densas; un multiplicador puro se diagonaliza sin ellas."""

    limit = CONFIG.numerics.max_matrix_side
    nodes = grid.npts**grid.dim
    if nodes <= limit:
        return
    if definition.multiplier_spectrum and symbol is not None:
        if not build_symbol(symbol, grid.dim).x_dependent:
            LOGGER.debug("Malla de %d nodos sin matriz densa (símbolo sin dependencia en x)", nodes)
            return
    raise ExperimentConfigError(
        f"la malla tiene {nodes} nodos; el máximo configurado es {limit}", "grid.npts"
    )


def _profile(payload: Any, path: str, dim: int) -> Mapping[str, Any]:
    section = _mapping(payload, path)
    _check_keys(section, PROFILE_KEYS, path)
    _choice(section.get("kind", "bump"), PROFILE_KINDS, f"{path}.kind")
    for key in ("radius", "width", "outer"):
        if key in section:
            _number(section[key], f"{path}.{key}", 0.0, exclusive=True)
    if "inner" in section:
        inner = _number(section["inner"], f"{path}.inner", 0.0, exclusive=True)
        if inner >= float(section.get("outer", 1.0)):
            raise ExperimentConfigError("debe ser menor que 'outer'", f"{path}.inner")
    for key in ("center", "wave"):
        if key in section:
            _number_list(section[key], f"{path}.{key}", dim)
    return section


def _symbol(payload: Any, dim: int) -> Mapping[str, Any]:
    section = _mapping(payload, "symbol")
    _check_keys(section, SYMBOL_KEYS, "symbol")
    _choice(section.get("family"), SYMBOL_FAMILIES, "symbol.family")
    if "order" in section:
        _number(section["order"], "symbol.order")
    if "truncation" in section:
        _integer(section["truncation"], "symbol.truncation", 1)
    if "n" in section:
        _integer(section["n"], "symbol.n", 1)
    if "seed" in section:
        _integer(section["seed"], "symbol.seed", 0, MAX_SEED)
    for key in ("coefficient", "modulation"):
        if key in section:
            _profile(section[key], f"symbol.{key}", dim)
    return section


def _model(payload: Any, dim: int) -> Mapping[str, Any]:
    section = _mapping(payload, "model")
    _check_keys(section, MODEL_KEYS, "model")
    _choice(section.get("law", "rademacher"), COUPLING_LAWS, "model.law")
    if "sample_count" in section:
        _integer(section["sample_count"], "model.sample_count", 1)
    if "spacing" in section:
        _number(section["spacing"], "model.spacing", 0.0, exclusive=True)
    for key in ("coupling", "frequency"):
        if key in section:
            _number(section[key], f"model.{key}")
    if "base" in section:
        _profile(section["base"], "model.base", dim)
    return section


def _tolerances(payload: Any) -> Tolerances:
    section = _mapping(payload or {}, "tolerances")
    _check_keys(section, TOLERANCE_KEYS, "tolerances")
    defaults = Tolerances()
    return Tolerances(
        relative=_number(
            section.get("relative", defaults.relative), "tolerances.relative", 0.0, exclusive=True
        ),
        absolute=_number(
            section.get("absolute", defaults.absolute), "tolerances.absolute", 0.0, exclusive=True
        ),
    )


# ----------------------------------------------------------------------
# Parámetros por experimento
# ----------------------------------------------------------------------
def _window(value: Any, path: str, dim: int) -> None:
    lower, upper = _number_list(value, path, 2)
    if not 0 < lower < upper <= 0.5:
        raise ExperimentConfigError("se requiere 0 < inferior < superior <= 0.5", path)


def _offsets(value: Any, path: str, dim: int) -> None:
    offsets = _number_list(value, path)
    if len(offsets) < 4:
        raise ExperimentConfigError("se necesitan al menos 4 desplazamientos", path)
    for i, offset in enumerate(offsets):
        _number(offset, f"{path}[{i}]", 1e-3, 0.5, exclusive=True)


def _cutoff(value: Any, path: str, dim: int) -> None:
    if value is None or value == "auto":
        return
    _number(value, path, 1.0, exclusive=True)


def _pairs(value: Any, path: str, dim: int) -> None:
    if not isinstance(value, list) or not value:
        raise ExperimentConfigError("se esperaba una lista no vacía de pares [z, w]", path)
    for i, pair in enumerate(value):
        _number_list(pair, f"{path}[{i}]", 2)


def _projection(value: Any, path: str, dim: int) -> None:
    if value is None:
        return
    if not isinstance(value, list) or not value:
        raise ExperimentConfigError("se esperaba una matriz cuadrada", path)
    for i, row in enumerate(value):
        _number_list(row, f"{path}[{i}]", len(value))


def _axis(value: Any, path: str, dim: int) -> None:
    _integer(value, path, 0, dim - 1)


def _positive(value: Any, path: str, dim: int) -> None:
    _number(value, path, 0.0, exclusive=True)


def _non_negative(value: Any, path: str, dim: int) -> None:
    _number(value, path, 0.0)


def _count(minimum: int) -> Callable[[Any, str, int], None]:
    def check(value: Any, path: str, dim: int) -> None:
        _integer(value, path, minimum)

    return check


def _fraction(value: Any, path: str, dim: int) -> None:
    _number(value, path, 0.0, 1.0, exclusive=True)


def _options(options: tuple[str, ...]) -> Callable[[Any, str, int], None]:
    def check(value: Any, path: str, dim: int) -> None:
        _choice(value, options, path)

    return check


def _optional_count(value: Any, path: str, dim: int) -> None:
    if value is not None:
        _integer(value, path, 1)


PARAMETER_RULES: Mapping[str, Callable[[Any, str, int], None]] = {
    "order": _positive,
    "window": _window,
    "shift": _non_negative,
    "projection": _projection,
    "axis": _axis,
    "alpha": lambda value, path, dim: _number(value, path),
    "potential": _options(POTENTIALS),
    "offsets": _offsets,
    "cutoff": _cutoff,
    "degree": _optional_count,
    "truncation": _count(1),
    "samples": _count(1),
    "directions": _count(1),
    "levels": _count(2),
    "pairs": _pairs,
    "matrices": _count(1),
    "matrix_size": _count(1),
    "condition": lambda value, path, dim: _number(value, path, 1.0),
    "exponent": lambda value, path, dim: _number(value, path, maximum=-1e-12),
    "nodes": _count(64),
    "observable": _options(OBSERVABLES),
    "band_fraction": _fraction,
    "points": _count(2),
    "min_decay": _positive,
    "fraction": _fraction,
    "drift_window": _window,
    "max_drift": _positive,
}


def _parameters(payload: Any, definition: ExperimentDefinition, dim: int) -> dict[str, Any]:
    section = _mapping(payload or {}, "parameters")
    _check_keys(section, frozenset(definition.parameters), "parameters")
    resolved = definition.resolve_parameters(section)
    for key, value in resolved.items():
        rule = PARAMETER_RULES.get(key)
        if rule is not None and value is not None:
            rule(value, f"parameters.{key}", dim)
    if definition.name == "weyl_commutator_frac":
        try:
            check_fractional_hypothesis(
                float(resolved["alpha"]), dim, str(resolved["potential"])
            )
        except DomainError as exc:
            raise ExperimentConfigError(str(exc), "parameters.alpha") from exc
    return resolved


# ----------------------------------------------------------------------
# API pública
# ----------------------------------------------------------------------
def build_experiment(
    payload: Any,
    source: Path | None = None,
    registry: ExperimentRegistry = REGISTRY,
    seed: int | None = None,
    output_dir: str | Path | None = None,
    workers: int | None = None,
) -> ExperimentConfig:
    """Valida ``payload`` y aplica las sobreescrituras de la línea de comandos."""

    data = dict(_mapping(payload, ""))
    _check_keys(data, TOP_LEVEL_KEYS, "")
    if "experiment" not in data:
        raise ExperimentConfigError("campo obligatorio ausente", "experiment")
    definition = registry.get(str(data["experiment"]))
    if seed is not None:
        data["seed"] = seed
    if output_dir is not None:
        data["output_dir"] = str(output_dir)
    data.setdefault("seed", 0)
    data.setdefault(
        "output_dir", str(Path(CONFIG.output.results_dir) / definition.name)
    )
    resolved_seed = _integer(data["seed"], "seed", 0, MAX_SEED)
    if not isinstance(data["output_dir"], str) or not data["output_dir"]:
        raise ExperimentConfigError("se esperaba una ruta no vacía", "output_dir")
    if workers is not None and workers < 1:
        raise ExperimentConfigError(f"debe ser >= 1 (recibido {workers})", "workers")

    if "grid" not in data:
        raise ExperimentConfigError("sección obligatoria ausente", "grid")
    grid = _grid(data["grid"], definition)
    for section in definition.requires:
        if data.get(section) is None:
            raise ExperimentConfigError("sección obligatoria ausente", section)
    symbol = _symbol(data["symbol"], grid.dim) if data.get("symbol") is not None else None
    _check_size(grid, definition, symbol)
    profile = (
        _profile(data["profile"], "profile", grid.dim) if data.get("profile") is not None else None
    )
    model = _model(data["model"], grid.dim) if data.get("model") is not None else None
    if model is not None and grid.length is None:
        raise ExperimentConfigError(
            "los modelos aleatorios necesitan una longitud de toro explícita", "grid.length"
        )
    parameters = _parameters(data.get("parameters"), definition, grid.dim)
    data["parameters"] = parameters
    tolerances = _tolerances(data.get("tolerances"))
    data["tolerances"] = {"relative": tolerances.relative, "absolute": tolerances.absolute}

    config = ExperimentConfig(
        experiment=definition.name,
        grid=grid,
        parameters=parameters,
        tolerances=tolerances,
        output_dir=Path(data["output_dir"]).expanduser(),
        seed=resolved_seed,
        symbol=symbol,
        profile=profile,
        model=model,
        workers=workers if workers is not None else CONFIG.numerics.default_workers,
        payload=data,
        source=source,
    )
    LOGGER.debug("Experimento '%s' validado (semilla %d)", config.experiment, config.seed)
    return config


def parse_experiment(text: str, source: Path | None = None, **overrides: Any) -> ExperimentConfig:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        where = f"{source}: " if source else ""
        raise ExperimentConfigError(
            f"{where}JSON inválido en línea {exc.lineno}, columna {exc.colno}: {exc.msg}"
        ) from exc
    return build_experiment(payload, source, **overrides)


def load_experiment(path: str | Path, **overrides: Any) -> ExperimentConfig:
    """Carga y valida un archivo de experimento."""

    config_path = Path(path).expanduser()
    try:
        text = config_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ExperimentConfigError(f"No se pudo leer '{config_path}': {exc}") from exc
    return parse_experiment(text, config_path, **overrides)


def with_field(
    config: ExperimentConfig,
    dotted: str,
    value: Any,
    registry: ExperimentRegistry = REGISTRY,
) -> ExperimentConfig:
    """Copia de ``config`` con ``dotted`` (p. ej. ``grid.npts``) sustituido y revalidado."""

    payload = config.raw()
    parts = dotted.split(".")
    if not all(parts):
        raise ExperimentConfigError("ruta de parámetro vacía", dotted)
    node: Any = payload
    for part in parts[:-1]:
        child = node.get(part) if isinstance(node, dict) else None
        if child is None:
            child = {}
            node[part] = child
        if not isinstance(child, dict):
            raise ExperimentConfigError("no es una sección", dotted)
        node = child
    node[parts[-1]] = value
    return build_experiment(payload, config.source, registry, workers=config.workers)


__all__ = [
    "PARAMETER_RULES",
    "build_experiment",
    "load_experiment",
    "parse_experiment",
    "with_field",
]
