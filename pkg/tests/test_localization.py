"""Pruebas del soporte de localización."""

from __future__ import annotations

import pytest

from weyl_lab.localization import LOCALE_ENV_VAR, _, detect_locale, reset_localizer


@pytest.fixture(autouse=True)
def _restore_locale(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.delenv(LOCALE_ENV_VAR, raising=False)
    yield
    monkeypatch.delenv(LOCALE_ENV_VAR, raising=False)
    reset_localizer()


def test_spanish_locale_overrides_english_strings():
    reset_localizer("es_ES.UTF-8")

    assert _("cli.labels.predicted") == "Predicho"
    assert _("cli.table.title", experiment="weyl_bessel") == "Experimento weyl_bessel"


def test_english_locale_formats_placeholders():
    reset_localizer("en")

    assert _("cli.table.title", experiment="zeta_residue").endswith("zeta_residue")


def test_unknown_key_falls_back_to_the_key():
    reset_localizer("en")

    assert _("cli.does.not.exist") == "cli.does.not.exist"


def test_missing_locale_falls_back_to_english():
    english = reset_localizer("en").get("cli.labels.measured")

    assert reset_localizer("pt-BR").get("cli.labels.measured") == english


def test_detect_locale_normalizes_environment(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv(LOCALE_ENV_VAR, "es_mx.UTF-8")

    assert detect_locale() == "es-MX"
