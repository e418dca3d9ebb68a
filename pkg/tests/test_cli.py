"""End-to-end tests of the command line front end, run in process."""

import json
import math

import numpy as np
import pytest

from tentmle.cli import main
from tentmle.fit import Model
from tentmle.model_io import read_model, write_model
from tentmle.tent import PointSet


def write_csv(path, text):
    path.write_text(text)
    return str(path)


def uniform_unit_model(tmp_path):
    path = tmp_path / "uniform.json"
    model = Model(
        PointSet(np.array([[0.0, 1.0]])), np.zeros(2), 0.0, normalized=True
    )
    write_model(path, model)
    return str(path)


def test_fit_writes_model_and_trace(tmp_path):
    data = write_csv(tmp_path / "two.csv", "0\n1\n")
    out = tmp_path / "model.json"
    code = main(
        ["fit", data, "--iterations", "20000", "--seed", "3", "--output", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert doc["normalized"] is True
    assert doc["seed"] == 3
    assert doc["config"]["iterations"] == 20000
    assert np.max(np.abs(doc["heights"])) < 0.05
    trace = (tmp_path / "model.trace.tsv").read_text().splitlines()
    assert trace[0] == "iter\teta\tgrad_norm\theight_sum"
    first = trace[1].split("\t")
    assert first[0] == "1" and float(first[1]) == 1.0
    assert all(float(line.split("\t")[2]) < 1.0 for line in trace[1:])


def test_fit_is_byte_identical_for_fixed_seed(tmp_path):
    data = write_csv(tmp_path / "two.csv", "0\n1\n")
    outputs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert main(["fit", data, "--iterations", "200", "--seed", "11",
                     "--output", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_fit_reports_bad_cell_location(tmp_path, capsys):
    data = write_csv(tmp_path / "bad.csv", "0,0\n1,0\n0,x\n")
    assert main(["fit", data]) == 1
    err = capsys.readouterr().err
    assert "row 3 column 2" in err


def test_fit_rejects_ragged_rows_and_empty_files(tmp_path, capsys):
    ragged = write_csv(tmp_path / "ragged.csv", "0,0\n1\n")
    assert main(["fit", ragged]) == 1
    assert "row 2" in capsys.readouterr().err
    empty = write_csv(tmp_path / "empty.csv", "")
    assert main(["fit", empty]) == 1


def test_fit_accepts_header_row(tmp_path):
    data = write_csv(tmp_path / "headed.csv", "x\n0\n1\n")
    out = tmp_path / "m.json"
    assert main(["fit", data, "--iterations", "50", "--seed", "1",
                 "--output", str(out)]) == 0
    assert json.loads(out.read_text())["count"] == 2


def test_single_point_is_degenerate(tmp_path):
    data = write_csv(tmp_path / "one.csv", "0.5\n")
    assert main(["fit", data]) == 2


def test_flag_domains_exit_with_usage_code(tmp_path):
    data = write_csv(tmp_path / "two.csv", "0\n1\n")
    for flags in (
        ["--epsilon", "0.5"],
        ["--epsilon", "0"],
        ["--seed", "-1"],
        ["--chain-steps", "0"],
        ["--round-target", "1.0"],
    ):
        with pytest.raises(SystemExit) as info:
            main(["fit", data, *flags])
        assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 64


def test_budget_exhaustion_exit_code(tmp_path):
    data = write_csv(tmp_path / "two.csv", "0\n1\n")
    out = tmp_path / "m.json"
    code = main(["fit", data, "--iterations", "2", "--seed", "1",
                 "--restarts", "1e-9", "--wall-cap", "0.001",
                 "--output", str(out)])
    assert code == 3
    assert out.exists()


def test_density_on_uniform_model(tmp_path, capsys):
    model = uniform_unit_model(tmp_path)
    assert main(["density", model, "--at", "0.5"]) == 0
    value = float(capsys.readouterr().out.strip())
    assert math.isclose(value, 1.0, abs_tol=1e-9)
    assert main(["density", model, "--at", "2.0"]) == 0
    assert float(capsys.readouterr().out.strip()) == 0.0
    assert main(["density", model, "--at", "0.5", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out) == {"density": 1.0}
    assert main(["density", model, "--at", "0.5,0.5"]) == 1


def test_loglik_matches_fit_objective(tmp_path, capsys):
    model = uniform_unit_model(tmp_path)
    data = write_csv(tmp_path / "pts.csv", "0\n1\n")
    assert main(["loglik", model, data]) == 0
    assert float(capsys.readouterr().out.strip()) == 0.0
    outside = write_csv(tmp_path / "far.csv", "3\n")
    assert main(["loglik", model, outside]) == 0
    assert capsys.readouterr().out.strip() == "-inf"
    wide = write_csv(tmp_path / "wide.csv", "0,0\n1,1\n")
    assert main(["loglik", model, wide]) == 1


def test_fit_then_loglik_pipeline_consistency(tmp_path, capsys):
    data = write_csv(tmp_path / "three.csv", "0\n0.5\n1\n")
    out = tmp_path / "m.json"
    assert main(["fit", data, "--iterations", "2000", "--seed", "5",
                 "--epsilon", "0.1", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert main(["loglik", str(out), data]) == 0
    total = float(capsys.readouterr().out.strip())
    objective = float(np.mean(doc["heights"]))
    assert abs(total / 3.0 - objective) <= 0.1 + 1e-9


def test_sample_is_deterministic_and_well_shaped(tmp_path):
    model = uniform_unit_model(tmp_path)
    first = tmp_path / "s1.csv"
    second = tmp_path / "s2.csv"
    for path in (first, second):
        assert main(["sample", model, "--count", "6", "--seed", "7",
                     "--output", str(path)]) == 0
    assert first.read_bytes() == second.read_bytes()
    rows = first.read_text().splitlines()
    assert len(rows) == 6
    assert all(0.0 <= float(row) <= 1.0 for row in rows)


def test_sample_planar_model(tmp_path):
    path = tmp_path / "square.json"
    square = PointSet(np.array([[0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]]))
    write_model(path, Model(square, np.zeros(4), 0.0, normalized=True))
    out = tmp_path / "draws.csv"
    assert main(["sample", str(path), "--count", "4", "--seed", "2",
                 "--output", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()]
    assert len(rows) == 4 and all(len(row) == 2 for row in rows)
    draws = np.array(rows, dtype=float)
    assert draws.min() >= 0.0 and draws.max() <= 1.0


def test_partition_reports_value_and_error(tmp_path, capsys):
    path = tmp_path / "flat2.json"
    write_model(
        path, Model(PointSet(np.array([[0.0, 2.0]])), np.zeros(2), 0.0)
    )
    assert main(["partition", str(path), "--seed", "9"]) == 0
    text = capsys.readouterr().out.strip()
    value, error = (float(part) for part in text.split(" ± "))
    assert abs(value - math.log(2.0)) <= error
    assert error <= 0.2
    assert main(["partition", str(path), "--seed", "9", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["slice_count"] >= 1
    assert doc["additive_error"] > 0.0


def test_oracle_fit_command(tmp_path, capsys):
    data = write_csv(tmp_path / "two.csv", "0\n1\n")
    out = tmp_path / "oracle.json"
    assert main(["oracle-fit", data, "--output", str(out)]) == 0
    model = read_model(out)
    assert np.max(np.abs(model.heights)) < 1e-6
    cube = write_csv(
        tmp_path / "cube.csv", "0,0,0\n1,0,0\n0,1,0\n0,0,1\n"
    )
    assert main(["oracle-fit", cube]) == 4
    assert "dimension" in capsys.readouterr().err


def test_model_file_errors_map_to_parse_exit(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["density", str(broken), "--at", "0.5"]) == 1
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"schema_version": 2}')
    assert main(["density", str(wrong), "--at", "0.5"]) == 1
