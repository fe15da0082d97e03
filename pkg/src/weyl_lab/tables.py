"""Escritura de tablas CSV con precisión completa."""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

CSV_PRECISION = 17


def format_cell(value: Any, precision: int = CSV_PRECISION) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)) or hasattr(value, "dtype"):
        return f"{float(value):.{precision}g}"
    return str(value)


def write_csv(
    path: Path | str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    precision: int = CSV_PRECISION,
) -> Path:
    """Escribe ``rows`` bajo ``header`` (RFC 4180, punto decimal, ``%.17g``)."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_cell(value, precision) for value in row])
    return target


__all__ = ["CSV_PRECISION", "format_cell", "write_csv"]
