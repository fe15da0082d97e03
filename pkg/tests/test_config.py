"""Pruebas de la configuración de aplicación."""

from __future__ import annotations

import pytest

from weyl_lab.config import (
    CONFIG_FILE_ENV,
    AppConfig,
    load_config,
    parse_config,
)
from weyl_lab.errors import ConfigurationError


def test_parse_config_applies_partial_sections():
    config = parse_config('{"numerics": {"default_workers": 3}, "output": {"csv_precision": 12}}')

    assert config.numerics.default_workers == 3
    assert config.numerics.truncation == 4
    assert config.output.csv_precision == 12
    assert config.logging == AppConfig().logging


@pytest.mark.parametrize(
    "text",
    [
        '{"plugins": {}}',
        '{"numerics": {"threads": 2}}',
        '{"numerics": {"default_workers": 0}}',
        '{"numerics": {"svd_driver": "lapack"}}',
        '{"output": {"csv_precision": 30}}',
        '{"logging": []}',
        "[]",
    ],
)
def test_parse_config_rejects_invalid_payloads(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)


def test_parse_config_reports_json_position():
    with pytest.raises(ConfigurationError, match="línea 2"):
        parse_config('{\n  "numerics": ,\n}', "app.json")


def test_load_config_reads_file_from_environment(tmp_path, monkeypatch: pytest.MonkeyPatch):
    path = tmp_path / "app.json"
    path.write_text('{"output": {"results_dir": "elsewhere"}}', encoding="utf-8")
    monkeypatch.setenv(CONFIG_FILE_ENV, str(path))

    assert load_config().output.results_dir == "elsewhere"


def test_load_config_without_file_uses_defaults(tmp_path, monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv(CONFIG_FILE_ENV, str(tmp_path / "missing.json"))

    assert load_config() == AppConfig()
