"""Carga de la configuración de aplicación de Weyl Lab."""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from ..errors import ConfigurationError

logger = logging.getLogger("weyl_lab.config")


@dataclass(frozen=True)
class LoggingConfig:
    level: str = "INFO"
    directory: str = "logs"
    filename: str = "weyl_lab.log"
    format: str = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
    when: str = "midnight"
    interval: int = 1
    backup_count: int = 7
    log_to_console: bool = False


@dataclass(frozen=True)
class NumericsConfig:
    default_workers: int | None = None
    truncation: int = 4
    sphere_samples: int = 200
    space_samples: int = 200
    contour_nodes: int = 64
    max_matrix_side: int = 8192
    svd_driver: str = "gesdd"


@dataclass(frozen=True)
class OutputConfig:
    results_dir: str = "results"
    csv_precision: int = 17


@dataclass(frozen=True)
class AppConfig:
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


CONFIG_FILE_ENV = "WEYL_LAB_CONFIG_FILE"
CONFIG_DIR_ENV = "WEYL_LAB_CONFIG_DIR"
DEFAULT_CONFIG_FILENAME = "app_config.json"
SVD_DRIVERS = ("gesdd", "gesvd")


def _default_conf_dir() -> Path:
    module_path = Path(__file__).resolve()
    return module_path.parents[3] / "conf"


def _resolve_config_path() -> Path:
    file_env = os.environ.get(CONFIG_FILE_ENV)
    if file_env:
        return Path(file_env).expanduser()

    dir_env = os.environ.get(CONFIG_DIR_ENV)
    base_dir = Path(dir_env).expanduser() if dir_env else _default_conf_dir()
    return base_dir / DEFAULT_CONFIG_FILENAME


def _section(cls: type, payload: Any, name: str) -> Any:
    if payload is None:
        return cls()
    if not isinstance(payload, Mapping):
        raise ConfigurationError(f"La sección '{name}' debe ser un objeto JSON.")
    known = {item.name for item in fields(cls)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigurationError(f"Claves desconocidas en '{name}': {', '.join(unknown)}.")
    return replace(cls(), **payload)


def _validate(config: AppConfig) -> AppConfig:
    workers = config.numerics.default_workers
    if workers is not None and workers < 1:
        raise ConfigurationError(f"numerics.default_workers debe ser >= 1 (recibido {workers}).")
    if config.numerics.svd_driver not in SVD_DRIVERS:
        raise ConfigurationError(
            f"numerics.svd_driver '{config.numerics.svd_driver}' no es uno de {SVD_DRIVERS}."
        )
    if not 1 <= config.output.csv_precision <= 17:
        raise ConfigurationError("output.csv_precision debe estar entre 1 y 17.")
    return config


def parse_config(text: str, source: str = "<texto>") -> AppConfig:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"{source}: JSON inválido en línea {exc.lineno}, columna {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(payload, Mapping):
        raise ConfigurationError(f"{source}: la configuración debe ser un objeto JSON.")
    unknown = sorted(set(payload) - {"logging", "numerics", "output"})
    if unknown:
        raise ConfigurationError(f"{source}: secciones desconocidas: {', '.join(unknown)}.")
    config = AppConfig(
        logging=_section(LoggingConfig, payload.get("logging"), "logging"),
        numerics=_section(NumericsConfig, payload.get("numerics"), "numerics"),
        output=_section(OutputConfig, payload.get("output"), "output"),
    )
    return _validate(config)


def load_config() -> AppConfig:
    """Carga ``app_config.json``; sin archivo se usan los valores integrados."""
    config_path = _resolve_config_path()
    if not config_path.exists():
        logger.debug("Sin configuración en %s; se usan los valores por defecto", config_path)
        return AppConfig()
    logger.debug("Cargando configuración desde %s", config_path)
    config = parse_config(config_path.read_text(encoding="utf-8"), str(config_path))
    logger.debug(
        "Configuración cargada correctamente: logging.level=%s workers=%s results=%s",
        config.logging.level,
        config.numerics.default_workers,
        config.output.results_dir,
    )
    return config


CONFIG = load_config()

__all__ = [
    "AppConfig",
    "CONFIG",
    "LoggingConfig",
    "NumericsConfig",
    "OutputConfig",
    "load_config",
    "parse_config",
]
