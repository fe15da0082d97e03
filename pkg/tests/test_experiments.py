"""Pruebas de la lectura de experimentos, del registro y de la ejecución."""

from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from weyl_lab.errors import ExperimentConfigError
from weyl_lab.experiments import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_TOLERANCE,
    REGISTRY,
    ExperimentDefinition,
    ExperimentRegistry,
    PipelineResult,
    build_experiment,
    load_experiment,
    parse_experiment,
    run_experiment,
    sweep,
    with_field,
)
from weyl_lab.experiments.runner import compare

EXPERIMENTS_DIR = Path(__file__).resolve().parents[1] / "conf" / "experiments"


def _linear_pipeline(config):
    value = float(config.parameters["order"])
    return PipelineResult(
        predicted=1.0,
        measured=value,
        header=("k", "value"),
        rows=[(0, value), (1, value / 3.0)],
        details={"note": "lineal"},
    )


@pytest.fixture()
def registry() -> ExperimentRegistry:
    registry = ExperimentRegistry()
    registry.register(
        ExperimentDefinition(
            name="linear",
            anchor="measured = order",
            pipeline=_linear_pipeline,
            parameters={"order": 1.0},
        )
    )
    return registry


def _linear_config(tmp_path, registry, **parameters):
    payload = {
        "experiment": "linear",
        "grid": {"dim": 1, "npts": 8},
        "parameters": parameters,
        "tolerances": {"relative": 0.01},
    }
    return build_experiment(payload, registry=registry, output_dir=tmp_path / "out")


def _frac_payload(**parameters):
    return {
        "experiment": "weyl_commutator_frac",
        "grid": {"dim": 2, "npts": 16},
        "profile": {"kind": "bump", "radius": 0.5},
        "parameters": parameters,
    }


def _dos_payload(**model):
    return {
        "experiment": "dos_random",
        "grid": {"dim": 1, "npts": 64, "length": 16.0},
        "symbol": {"family": "abs_power", "order": 2.0},
        "model": {"law": "rademacher", "base": {"kind": "bump", "radius": 0.4}, **model},
    }


# ----------------------------------------------------------------------
# Validación
# ----------------------------------------------------------------------
@pytest.mark.parametrize("path", sorted(EXPERIMENTS_DIR.glob("*.json")), ids=lambda p: p.stem)
def test_bundled_experiment_files_are_valid(path, tmp_path):
    config = load_experiment(path, output_dir=tmp_path)

    assert config.experiment == path.stem
    assert config.source == path
    assert set(config.parameters) == set(REGISTRY.get(path.stem).parameters)


def test_every_registered_experiment_has_a_bundled_file():
    bundled = {path.stem for path in EXPERIMENTS_DIR.glob("*.json")}

    assert set(REGISTRY.names) == bundled


@pytest.mark.parametrize(
    ("mutation", "path"),
    [
        ({"plugins": {}}, "plugins"),
        ({"grid": {"dim": 2, "npts": 16, "spacing": 0.1}}, "grid.spacing"),
        ({"grid": {"dim": 2, "npts": 15}}, "grid.npts"),
        ({"grid": {"dim": 4, "npts": 4}}, "grid.dim"),
        ({"profile": {"kind": "triangle"}}, "profile.kind"),
        ({"profile": {"kind": "bump", "center": [0.0]}}, "profile.center"),
        ({"parameters": {"bogus": 1}}, "parameters.bogus"),
        ({"parameters": {"window": [0.3, 0.2]}}, "parameters.window"),
        ({"parameters": {"alpha": -3.0}}, "parameters.alpha"),
        ({"parameters": {"potential": "yukawa"}}, "parameters.potential"),
        ({"tolerances": {"relative": 0}}, "tolerances.relative"),
        ({"seed": -1}, "seed"),
        ({"experiment": "nope"}, "experiment"),
        ({"profile": None}, "profile"),
    ],
)
def test_invalid_fields_are_reported_with_their_path(mutation, path):
    payload = _frac_payload()
    payload.update(mutation)

    with pytest.raises(ExperimentConfigError) as info:
        build_experiment(payload)

    assert info.value.path == path


def test_calderon_zygmund_experiment_requires_two_dimensions():
    payload = {
        "experiment": "weyl_commutator_cz",
        "grid": {"dim": 1, "npts": 64},
        "profile": {"kind": "bump"},
    }

    with pytest.raises(ExperimentConfigError) as info:
        build_experiment(payload)

    assert info.value.path == "grid.dim"


def test_random_model_fields_are_validated():
    with pytest.raises(ExperimentConfigError) as info:
        build_experiment(_dos_payload(sample_count=0))
    assert info.value.path == "model.sample_count"

    payload = _dos_payload()
    payload["grid"] = {"dim": 1, "npts": 64}
    with pytest.raises(ExperimentConfigError) as info:
        build_experiment(payload)
    assert info.value.path == "grid.length"


def test_grid_size_limit_is_enforced():
    payload = _frac_payload()
    payload["grid"] = {"dim": 3, "npts": 64}

    with pytest.raises(ExperimentConfigError, match="máximo"):
        build_experiment(payload)


def test_zeta_grid_beyond_dense_limit_is_allowed_for_pure_multipliers():
    payload = {
        "experiment": "zeta_residue",
        "grid": {"dim": 2, "npts": 128},
        "symbol": {"family": "bessel", "order": 2.0, "truncation": 4},
        "profile": {"kind": "bump", "radius": 1.0},
    }

    assert build_experiment(payload).grid.npts == 128

    payload["symbol"] = {"family": "random_elliptic", "n": 2, "order": 2.0}
    with pytest.raises(ExperimentConfigError, match="máximo"):
        build_experiment(payload)


def test_symbol_modulation_is_validated_as_a_profile():
    payload = {
        "experiment": "parametrix_check",
        "grid": {"dim": 1, "npts": 32, "length": 8.0},
        "symbol": {
            "family": "random_elliptic",
            "order": 2.0,
            "modulation": {"kind": "wave", "wave": [0.5]},
        },
    }

    assert build_experiment(payload).symbol["modulation"]["kind"] == "wave"

    payload["symbol"]["modulation"] = {"kind": "sawtooth"}
    with pytest.raises(ExperimentConfigError) as info:
        build_experiment(payload)
    assert info.value.path == "symbol.modulation.kind"


def test_dixmier_parameters_are_validated():
    payload = {
        "experiment": "dixmier",
        "grid": {"dim": 2, "npts": 16, "length": 9.0},
        "profile": {"kind": "plateau", "inner": 1.7, "outer": 2.1},
        "parameters": {"drift_window": [0.4, 0.2]},
    }

    with pytest.raises(ExperimentConfigError) as info:
        build_experiment(payload)
    assert info.value.path == "parameters.drift_window"

    payload["parameters"] = {"fraction": 1.5}
    with pytest.raises(ExperimentConfigError) as info:
        build_experiment(payload)
    assert info.value.path == "parameters.fraction"


def test_json_errors_report_line_and_column():
    with pytest.raises(ExperimentConfigError, match="línea 3, columna"):
        parse_experiment('{\n  "experiment": "weyl_bessel",\n  "grid": }')


def test_missing_file_is_a_configuration_error(tmp_path):
    with pytest.raises(ExperimentConfigError):
        load_experiment(tmp_path / "missing.json")


def test_overrides_and_resolved_defaults(tmp_path):
    config = build_experiment(_frac_payload(), seed=99, output_dir=tmp_path, workers=3)

    assert config.seed == 99
    assert config.output_dir == tmp_path
    assert config.workers == 3
    assert config.parameters["alpha"] == 0.5
    assert config.parameters["potential"] == "riesz"
    assert config.raw()["parameters"]["window"] == [0.02, 0.15]
    assert config.to_manifest()["workers"] == 3


def test_default_output_dir_uses_experiment_name():
    config = build_experiment(_frac_payload())

    assert config.output_dir.name == "weyl_commutator_frac"


def test_with_field_revalidates_the_copy():
    config = build_experiment(_frac_payload())

    changed = with_field(config, "parameters.alpha", 0.25)

    assert changed.parameters["alpha"] == 0.25
    assert config.parameters["alpha"] == 0.5
    with pytest.raises(ExperimentConfigError) as info:
        with_field(config, "grid.npts", 17)
    assert info.value.path == "grid.npts"


# ----------------------------------------------------------------------
# Registro
# ----------------------------------------------------------------------
def test_registry_rejects_duplicates(registry: ExperimentRegistry):
    with pytest.raises(ExperimentConfigError):
        registry.register(ExperimentDefinition("linear", "otra", _linear_pipeline))


def test_registry_lists_names_sorted():
    assert REGISTRY.names == tuple(sorted(REGISTRY.names))
    assert len(REGISTRY.names) == 10
    assert all(definition.anchor for definition in REGISTRY.definitions)


# ----------------------------------------------------------------------
# Ejecución
# ----------------------------------------------------------------------
def test_compare_uses_relative_or_absolute_error(tmp_path, registry):
    config = _linear_config(tmp_path, registry)
    relative = PipelineResult(2.0, 2.01, ("a",), [])
    absolute = PipelineResult(0.0, 1e-7, ("a",), [], comparison="absolute")
    failing_check = PipelineResult(2.0, 2.0, ("a",), [], checks={"extra": 0.5})
    nan = PipelineResult(2.0, math.nan, ("a",), [])

    error, tolerance, passed = compare(relative, config)

    assert error == pytest.approx(0.005)
    assert tolerance == 0.01
    assert passed is True
    assert compare(absolute, config)[2] is True
    assert compare(failing_check, config)[2] is False
    assert compare(nan, config)[2] is False


def test_compare_applies_own_limits_to_listed_checks(tmp_path, registry):
    config = _linear_config(tmp_path, registry)
    within = PipelineResult(2.0, 2.0, ("a",), [], checks={"drift": 0.02}, limits={"drift": 0.03})
    beyond = PipelineResult(2.0, 2.0, ("a",), [], checks={"drift": 0.005}, limits={"drift": 0.0})

    assert compare(within, config)[2] is True
    assert compare(beyond, config)[2] is False


def test_run_experiment_writes_artifacts(tmp_path, registry):
    config = _linear_config(tmp_path, registry)

    report = run_experiment(config, registry)

    assert report.status == EXIT_OK
    assert report.passed
    out = tmp_path / "out"
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert summary["pass"] is True
    assert summary["anchor"] == "measured = order"
    assert summary["details"] == {"note": "lineal"}
    assert manifest["config"]["parameters"] == {"order": 1.0}
    assert set(manifest["environment"]) >= {"weyl_lab", "numpy", "scipy", "python"}
    assert (out / "results.csv").read_bytes().startswith(b"k,value\r\n0,1\r\n")


def test_run_experiment_reports_tolerance_failures(tmp_path, registry):
    config = _linear_config(tmp_path, registry, order=1.5)

    report = run_experiment(config, registry)

    assert report.status == EXIT_TOLERANCE
    assert report.error == pytest.approx(0.5)
    summary = json.loads((tmp_path / "out" / "summary.json").read_text(encoding="utf-8"))
    assert summary["pass"] is False


def test_sweep_runs_each_value_in_its_own_directory(tmp_path, registry):
    config = _linear_config(tmp_path, registry)

    report = sweep(config, "parameters.order", [1.0, 1.5, -1.0], registry)

    statuses = [item.status for item in report.reports]
    assert statuses == [EXIT_OK, EXIT_TOLERANCE, EXIT_ERROR]
    assert report.status == EXIT_TOLERANCE
    assert (tmp_path / "out" / "000_1.0" / "summary.json").is_file()
    assert (tmp_path / "out" / "001_1.5" / "results.csv").is_file()
    lines = report.table.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "parameters.order,predicted,measured,error,status,directory"
    assert len(lines) == 4
    assert lines[3].endswith(",1,002_-1.0")


def test_sweep_rejects_empty_value_list(tmp_path, registry):
    with pytest.raises(ExperimentConfigError):
        sweep(_linear_config(tmp_path, registry), "parameters.order", [], registry)


@pytest.mark.slow
def test_weyl_bessel_results_are_reproducible(tmp_path):
    payload = {
        "experiment": "weyl_bessel",
        "grid": {"dim": 1, "npts": 64},
        "profile": {"kind": "indicator", "center": [0.5], "radius": 0.5},
    }
    first = run_experiment(build_experiment(payload, output_dir=tmp_path / "a"))
    second = run_experiment(build_experiment(payload, output_dir=tmp_path / "b"))

    assert first.predicted == pytest.approx(1.0 / math.pi, rel=1e-10)
    assert math.isfinite(first.measured)
    assert first.measured == second.measured
    assert (tmp_path / "a" / "results.csv").read_bytes() == (
        tmp_path / "b" / "results.csv"
    ).read_bytes()


@pytest.mark.slow
def test_results_do_not_depend_on_worker_count(tmp_path):
    payload = json.loads((EXPERIMENTS_DIR / "weyl_elliptic.json").read_text(encoding="utf-8"))
    payload["grid"]["npts"] = 64

    serial = run_experiment(build_experiment(payload, output_dir=tmp_path / "w1", workers=1))
    parallel = run_experiment(build_experiment(payload, output_dir=tmp_path / "w4", workers=4))

    assert serial.measured == parallel.measured
    assert (tmp_path / "w1" / "results.csv").read_bytes() == (
        tmp_path / "w4" / "results.csv"
    ).read_bytes()


@pytest.mark.slow
def test_dixmier_pipeline_restricts_the_domain_to_the_support(tmp_path):
    payload = {
        "experiment": "dixmier",
        "grid": {"dim": 2, "npts": 32, "length": 9.0},
        "profile": {"kind": "plateau", "inner": 1.7, "outer": 2.1},
    }

    report = run_experiment(build_experiment(payload, output_dir=tmp_path))

    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
    assert report.predicted > 0
    assert math.isfinite(report.measured)
    assert summary["limits"] == {"drift": 0.03}
    assert 0 < summary["details"]["support_weight"] < 32 * 32
    assert math.isfinite(summary["checks"]["drift"])


@pytest.mark.slow
@pytest.mark.parametrize(
    "name",
    [
        "weyl_bessel",
        "weyl_elliptic",
        "weyl_commutator_cz",
        "weyl_commutator_frac",
        "zeta_residue",
        "microlocal_count",
        "dixmier",
        "dos_random",
        "parametrix_check",
        "power_group_check",
    ],
)
def test_bundled_experiment_passes(name, tmp_path):
    config = load_experiment(EXPERIMENTS_DIR / f"{name}.json", output_dir=tmp_path)

    report = run_experiment(config)

    assert report.status == EXIT_OK, (report.predicted, report.measured, report.checks)
