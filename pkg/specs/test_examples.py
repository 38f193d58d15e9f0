"""Shipped example configurations stay valid."""

import json

from validate_schemas import EXAMPLES_DIR, export_schemas, validate_example, validate_examples


def test_every_example_validates():
    results = validate_examples()
    assert set(results) == {"noise-spec.json", "sbm.json", "sweep-grid.json", "tss-config.json"}
    assert all(errors == [] for errors in results.values()), results


def test_invalid_config_is_reported(tmp_path):
    path = tmp_path / "tss-config-bad.json"
    path.write_text(json.dumps({"lambda0": 0.0}), encoding="utf-8")
    errors = validate_example(path)
    assert errors and errors[0].startswith("lambda0")


def test_bad_grid_is_reported(tmp_path):
    path = tmp_path / "sweep-grid-bad.json"
    path.write_text(json.dumps({"momentum": [0.9]}), encoding="utf-8")
    assert validate_example(path)


def test_schema_export(tmp_path):
    export_schemas(tmp_path)
    schema = json.loads((tmp_path / "tss-config.schema.json").read_text(encoding="utf-8"))
    assert "lambda0" in schema["properties"]
    assert EXAMPLES_DIR.is_dir()
