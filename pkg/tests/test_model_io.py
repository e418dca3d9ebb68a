"""Tests for model JSON persistence."""

import json
import math

import numpy as np
import pytest

from tentmle.errors import ParseError
from tentmle.fit import Model
from tentmle.model_io import (
    SCHEMA_VERSION,
    document_to_model,
    model_to_document,
    read_model,
    write_model,
)
from tentmle.tent import PointSet


def awkward_model():
    ps = PointSet(np.array([[0.0, math.pi, 1.0 / 3.0], [0.0, 0.1, math.e]]))
    heights = np.array([0.1234567890123456, -1.0 / 7.0, math.sqrt(2.0)])
    diagnostics = {
        "iterations_run": 12,
        "surrogate_trace": ((1, 0.25), (12, 0.5)),
        "final_height_norm": float(np.linalg.norm(heights)),
    }
    return Model(ps, heights, math.log(3.0) / 7.0, diagnostics=diagnostics)


def test_round_trip_is_bit_identical(tmp_path):
    model = awkward_model()
    path = tmp_path / "model.json"
    write_model(path, model, seed=42, config={"iterations": 12})
    loaded = read_model(path)
    assert np.array_equal(loaded.point_set.points, model.point_set.points)
    assert np.array_equal(loaded.heights, model.heights)
    assert loaded.log_partition == model.log_partition
    assert loaded.normalized == model.normalized
    # A second write of the loaded model reproduces the numeric fields
    # byte-for-byte.
    first = model_to_document(model)
    second = model_to_document(loaded)
    for key in ("points", "heights", "log_partition"):
        assert json.dumps(first[key]) == json.dumps(second[key])


def test_document_echoes_seed_and_config():
    doc = model_to_document(awkward_model(), seed=7, config={"iterations": 5})
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["dim"] == 2
    assert doc["count"] == 3
    assert doc["seed"] == 7
    assert doc["config"] == {"iterations": 5}
    assert doc["diagnostics"]["iterations_run"] == 12
    assert doc["diagnostics"]["surrogate_trace"] == [[1, 0.25], [12, 0.5]]
    assert json.dumps(doc)


def test_document_to_model_validates_shape_and_version():
    doc = model_to_document(awkward_model())
    bad = dict(doc, schema_version=99)
    with pytest.raises(ParseError):
        document_to_model(bad)
    bad = dict(doc, heights=[0.0])
    with pytest.raises(ParseError):
        document_to_model(bad)
    bad = dict(doc, points=[[0.0, 0.0]])
    with pytest.raises(ParseError):
        document_to_model(bad)
    bad = dict(doc)
    del bad["log_partition"]
    with pytest.raises(ParseError):
        document_to_model(bad)
    with pytest.raises(ParseError):
        document_to_model([1, 2, 3])


def test_read_reports_invalid_json_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"schema_version": 1,\n  "dim": oops}\n')
    with pytest.raises(ParseError) as info:
        read_model(path)
    assert info.value.row == 2
    with pytest.raises(ParseError):
        read_model(tmp_path / "missing.json")
