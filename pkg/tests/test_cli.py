"""Pruebas de la interfaz de línea de comandos y del logging."""

from __future__ import annotations

import json
import logging
from logging.handlers import TimedRotatingFileHandler

import pytest

from weyl_lab.cli import _parse_values, main
from weyl_lab.config import LoggingConfig
from weyl_lab.experiments import EXIT_ERROR, EXIT_OK, EXIT_TOLERANCE
from weyl_lab.logging_setup import configure_logging, log_path


@pytest.fixture()
def bessel_file(tmp_path):
    path = tmp_path / "bessel.json"
    payload = {
        "experiment": "weyl_bessel",
        "grid": {"dim": 1, "npts": 64},
        "profile": {"kind": "indicator", "center": [0.5], "radius": 0.5},
        "tolerances": {"relative": 1e-12},
    }
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_parse_values_accepts_numbers_and_bare_strings():
    assert _parse_values("32,64") == [32, 64]
    assert _parse_values("0.25, -0.5") == [0.25, -0.5]
    assert _parse_values("riesz,bessel") == ["riesz", "bessel"]
    assert _parse_values('[1, 2],[3, 4]') == [[1, 2], [3, 4]]


def test_list_command_succeeds():
    assert main(["list"]) == EXIT_OK


def test_invalid_config_returns_error_status(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"experiment": "weyl_bessel", "grid": {"dim": 1, "npts": 7}}', "utf-8")

    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == EXIT_ERROR
    assert not (tmp_path / "out" / "summary.json").exists()


def test_missing_config_returns_error_status(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == EXIT_ERROR


@pytest.mark.slow
def test_run_outside_tolerance_returns_two(tmp_path, bessel_file):
    out = tmp_path / "out"

    status = main(["run", str(bessel_file), "--out", str(out), "--seed", "5", "--workers", "1"])

    assert status == EXIT_TOLERANCE
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert summary["pass"] is False
    assert summary["seed"] == 5
    assert manifest["config"]["workers"] == 1


@pytest.mark.slow
def test_sweep_command_writes_summary_table(tmp_path, bessel_file):
    out = tmp_path / "sweep"

    status = main(
        ["sweep", str(bessel_file), "--out", str(out), "--param", "grid.npts", "--values", "32,33"]
    )

    assert status == EXIT_TOLERANCE
    lines = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert lines[2].endswith(",1,001_33")


def test_configure_logging_writes_to_configured_file(tmp_path):
    config = LoggingConfig(level="DEBUG", directory=str(tmp_path), filename="lab.log")

    logger = configure_logging(config, console=False)
    logging.getLogger("weyl_lab.test").debug("mensaje de prueba")

    handlers = logger.handlers
    assert logger.name == "weyl_lab"
    assert logger.level == logging.DEBUG
    assert len(handlers) == 1
    assert isinstance(handlers[0], TimedRotatingFileHandler)
    handlers[0].flush()
    assert "mensaje de prueba" in (tmp_path / "lab.log").read_text(encoding="utf-8")


def test_configure_logging_adds_console_handler_on_request(tmp_path):
    config = LoggingConfig(directory=str(tmp_path))

    logger = configure_logging(config, console=True)

    assert len(logger.handlers) == 2


def test_configure_logging_replaces_previous_handlers_and_keeps_root(tmp_path):
    root_handlers = list(logging.getLogger().handlers)
    config = LoggingConfig(directory=str(tmp_path), filename="lab.log")

    configure_logging(config, console=True)
    logger = configure_logging(config, console=False)

    assert len(logger.handlers) == 1
    assert logging.getLogger("py.warnings").handlers == logger.handlers
    assert logging.getLogger().handlers == root_handlers


def test_log_path_resolves_relative_and_absolute_names(tmp_path):
    absolute = LoggingConfig(filename=str(tmp_path / "direct.log"))
    relative = LoggingConfig(directory=str(tmp_path / "logs"), filename="lab.log")

    assert log_path(absolute) == tmp_path / "direct.log"
    assert log_path(relative) == tmp_path / "logs" / "lab.log"
