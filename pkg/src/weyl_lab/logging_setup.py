"""Logging de Weyl Lab: fichero rotado por fecha y, opcionalmente, consola con ``rich``.

Los manejadores se cuelgan del logger ``weyl_lab`` y no del raíz, de modo que una aplicación
que importe la biblioteca conserva su propia configuración. Los avisos de NumPy y SciPy
(``LinAlgWarning``, divisiones por cero en cuadraturas...) llegan al mismo fichero a través
de ``py.warnings``.
"""

from __future__ import annotations

import logging
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

from rich.logging import RichHandler

from .config import LoggingConfig

PACKAGE_LOGGER = "weyl_lab"
WARNINGS_LOGGER = "py.warnings"
_PROJECT_ROOT = Path(__file__).resolve().parents[2]


def log_path(config: LoggingConfig) -> Path:
    """Ruta del fichero de log; los directorios relativos cuelgan de la raíz del proyecto."""

    filename = Path(config.filename).expanduser()
    if filename.is_absolute():
        return filename
    directory = Path(config.directory).expanduser()
    if not directory.is_absolute():
        directory = _PROJECT_ROOT / directory
    return directory / filename


def _reset(logger: logging.Logger) -> None:
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def _handlers(config: LoggingConfig, path: Path, console: bool) -> list[logging.Handler]:
    path.parent.mkdir(parents=True, exist_ok=True)
    rotating = TimedRotatingFileHandler(
        path,
        when=config.when,
        interval=config.interval,
        backupCount=config.backup_count,
        encoding="utf-8",
    )
    rotating.setFormatter(logging.Formatter(config.format))
    handlers: list[logging.Handler] = [rotating]
    if console:
        terminal = RichHandler(show_path=False, rich_tracebacks=True, markup=False)
        terminal.setFormatter(logging.Formatter("[%(name)s] %(message)s"))
        handlers.append(terminal)
    return handlers


def configure_logging(config: LoggingConfig, console: bool | None = None) -> logging.Logger:
    """Instala los manejadores de ``weyl_lab`` y devuelve ese logger.

    ``console`` tiene prioridad sobre ``config.log_to_console``. Llamarla de nuevo sustituye
    (y cierra) los manejadores anteriores.
    """

    level = logging.getLevelName(config.level.upper())
    if not isinstance(level, int):
        level = logging.INFO
    path = log_path(config)
    handlers = _handlers(config, path, config.log_to_console if console is None else console)

    logger = logging.getLogger(PACKAGE_LOGGER)
    warnings_logger = logging.getLogger(WARNINGS_LOGGER)
    for target in (logger, warnings_logger):
        _reset(target)
        for handler in handlers:
            target.addHandler(handler)
    logger.setLevel(level)
    warnings_logger.setLevel(logging.WARNING)
    logging.captureWarnings(True)
    logger.debug("Logging configurado en %s (nivel %s)", path, logging.getLevelName(level))
    return logger
