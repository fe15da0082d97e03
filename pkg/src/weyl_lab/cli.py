"""Punto de entrada de la interfaz de línea de comandos de Weyl Lab."""

from __future__ import annotations

import argparse
import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.table import Table

from .config import CONFIG
from .errors import WeylLabError
from .experiments import (
    EXIT_ERROR,
    EXIT_OK,
    REGISTRY,
    ExitReport,
    SweepReport,
    load_experiment,
    run_experiment,
    sweep,
)
from .localization import _
from .logging_setup import configure_logging

LOGGER = logging.getLogger("weyl_lab.cli")


def _parse_values(text: str) -> list[Any]:
    """``"32,64"`` -> ``[32, 64]``; admite listas JSON y cadenas sin comillas."""

    try:
        return list(json.loads(f"[{text}]"))
    except json.JSONDecodeError:
        return [item.strip() for item in text.split(",") if item.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weyl-lab", description=_("cli.description"))
    parser.add_argument("-v", "--verbose", action="store_true", help=_("cli.help.verbose"))
    commands = parser.add_subparsers(dest="command", required=True)

    def experiment_command(name: str) -> argparse.ArgumentParser:
        command = commands.add_parser(name, help=_(f"cli.help.{name}"))
        command.add_argument("config", type=Path, help=_("cli.help.config"))
        command.add_argument("--workers", type=int, help=_("cli.help.workers"))
        command.add_argument("--out", type=Path, help=_("cli.help.out"))
        command.add_argument("--seed", type=int, help=_("cli.help.seed"))
        return command

    experiment_command("run")
    sweep_command = experiment_command("sweep")
    sweep_command.add_argument("--param", required=True, help=_("cli.help.param"))
    sweep_command.add_argument(
        "--values", required=True, type=_parse_values, help=_("cli.help.values")
    )
    commands.add_parser("list", help=_("cli.help.list"))
    return parser


# ----------------------------------------------------------------------
# Presentación
# ----------------------------------------------------------------------
def _status_label(status: int) -> str:
    key = {EXIT_OK: "pass", EXIT_ERROR: "error"}.get(status, "fail")
    return _(f"cli.status.{key}")


def _report_table(report: ExitReport) -> Table:
    table = Table(title=_("cli.table.title", experiment=report.experiment))
    table.add_column(_("cli.table.field"), style="bold")
    table.add_column(_("cli.table.value"), justify="right")
    table.add_row(_("cli.labels.predicted"), f"{report.predicted:.10g}")
    table.add_row(_("cli.labels.measured"), f"{report.measured:.10g}")
    table.add_row(_(f"cli.labels.error_{report.comparison}"), f"{report.error:.3e}")
    table.add_row(_("cli.labels.tolerance"), f"{report.tolerance:.3e}")
    for name, value in report.checks.items():
        table.add_row(name, f"{value:.3e}")
    table.add_row(_("cli.labels.wall_time"), f"{report.wall_time:.2f} s")
    table.add_row(_("cli.labels.output"), str(report.output_dir))
    table.add_row(_("cli.labels.status"), _status_label(report.status))
    return table


def _sweep_table(report: SweepReport) -> Table:
    table = Table(title=_("cli.sweep.title", parameter=report.parameter))
    for key in ("directory", "predicted", "measured", "error", "status"):
        table.add_column(_(f"cli.labels.{key}"))
    for item in report.reports:
        table.add_row(
            item.output_dir.name,
            f"{item.predicted:.6g}",
            f"{item.measured:.6g}",
            f"{item.error:.3e}",
            _status_label(item.status),
        )
    return table


def _list_table() -> Table:
    table = Table(title=_("cli.list.title"))
    table.add_column(_("cli.list.name"), style="bold")
    table.add_column(_("cli.list.description"))
    table.add_column(_("cli.list.anchor"), overflow="fold")
    for definition in REGISTRY.definitions:
        description = _(definition.description_key) if definition.description_key else ""
        table.add_row(definition.name, description, definition.anchor)
    return table


# ----------------------------------------------------------------------
# Comandos
# ----------------------------------------------------------------------
def _execute(args: argparse.Namespace, console: Console) -> int:
    if args.command == "list":
        console.print(_list_table())
        return EXIT_OK
    config = load_experiment(args.config, seed=args.seed, output_dir=args.out, workers=args.workers)
    if args.command == "sweep":
        sweep_report = sweep(config, args.param, args.values)
        console.print(_sweep_table(sweep_report))
        console.print(_("cli.sweep.table", path=str(sweep_report.table)))
        return sweep_report.status
    report = run_experiment(config)
    console.print(_report_table(report))
    return report.status


def main(argv: Sequence[str] | None = None) -> int:
    """Ejecuta la CLI y devuelve el estado: 0 aprobado, 2 fuera de tolerancia, 1 error."""

    parser = _build_parser()
    args = parser.parse_args(argv)
    configure_logging(CONFIG.logging, console=args.verbose or None)
    console = Console()
    errors = Console(stderr=True)
    try:
        return _execute(args, console)
    except WeylLabError as exc:
        LOGGER.error("Ejecución abortada: %s", exc, exc_info=True)
        errors.print(_("cli.error", message=str(exc)), markup=False)
    except OSError as exc:
        LOGGER.error("Error de entrada/salida: %s", exc, exc_info=True)
        errors.print(_("cli.error", message=str(exc)), markup=False)
    except Exception as exc:  # pragma: no cover - cualquier fallo inesperado es estado 1.
        LOGGER.exception("Fallo inesperado")
        errors.print(_("cli.unexpected", message=repr(exc)), markup=False)
    return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
