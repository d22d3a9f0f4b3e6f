import csv
import io
import json

import numpy as np
import pytest
from click.testing import CliRunner
from pytest import approx

from wedgecrack.cli import (EXIT_NUMERICAL, EXIT_VALIDATION, SWEEP_COLUMNS, main, parse_angle, parse_angle_range,
                            reference_tables)


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)

    return invoke


def rows(text):
    return list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))


class TestAngles:
    @pytest.mark.parametrize("text,value", [("90deg", np.pi / 2), ("1/2pi", np.pi / 2), ("0.75pi", 0.75 * np.pi),
                                            ("1.25rad", 1.25), (" 45 deg ", np.pi / 4)])
    def test_units(self, text, value):
        assert parse_angle(text) == approx(value, rel=1e-15)

    @pytest.mark.parametrize("text", ["90", "1.2 grad", "pi", ""])
    def test_unit_required(self, text):
        with pytest.raises(ValueError):
            parse_angle(text)

    def test_range_inclusive(self):
        vals = parse_angle_range("10:170:5deg")
        assert len(vals) == 33
        assert vals[-1] == approx(np.deg2rad(170))

    def test_single_value_range(self):
        assert parse_angle_range("30deg") == [approx(np.pi / 6)]

    @pytest.mark.parametrize("text", ["10:5:1deg", "0:10:0deg"])
    def test_bad_range(self, text):
        with pytest.raises(ValueError):
            parse_angle_range(text)


class TestCommands:
    def test_edge(self, run):
        res = run("edge", "--alpha", "90deg", "--load", "1,0", "--no-timestamp")
        assert res.exit_code == 0
        (row,) = rows(res.output)
        assert float(row["D11"]) == approx(1.776778, rel=1e-5)

    def test_edge_eigen(self, run):
        res = run("edge", "--alpha", "1/4pi", "--eigen", "first", "--no-timestamp")
        assert res.exit_code == 0

    def test_halfplane_edge_limit(self, run):
        res = run("halfplane", "--a", "0", "--b", "1", "--P", "1", "--format", "json")
        data = json.loads(res.output)
        assert data["rows"][0]["K_I_plus"] == approx(np.sqrt(np.pi) * 1.1215222, rel=1e-6)

    def test_internal(self, run):
        res = run("internal", "--alpha", "90deg", "--a", "0.3", "--b", "1", "--load", "1,1", "--no-timestamp")
        (row,) = rows(res.output)
        assert float(row["delta"]) == approx(0.3)
        assert float(row["closure_defect"]) < 1e-8

    def test_timestamp_line(self, run):
        res = run("edge", "--alpha", "90deg", "--load", "1,0")
        assert res.output.startswith("# generated")

    def test_output_file(self, run, tmp_path):
        out = tmp_path / "k.csv"
        res = run("halfplane", "--a", "0.5", "--b", "1", "-o", str(out), "--no-timestamp")
        assert res.exit_code == 0
        assert float(rows(out.read_text())[0]["K_I_plus"]) == approx(0.90800382, rel=1e-7)


class TestExitCodes:
    @pytest.mark.parametrize("args", [
        ("edge", "--alpha", "200deg", "--load", "1,0"),
        ("edge", "--alpha", "90", "--load", "1,0"),
        ("edge", "--alpha", "90deg"),
        ("internal", "--alpha", "90deg", "--a", "1", "--b", "1"),
        ("halfplane", "--a", "-1", "--b", "1"),
        ("tables", "4"),
    ])
    def test_validation(self, run, args):
        assert run(*args).exit_code == EXIT_VALIDATION

    def test_numerical(self, run):
        res = run("halfplane", "--a", "0.999", "--b", "1")
        assert res.exit_code == EXIT_NUMERICAL
        assert "TruncationError" in res.output


class TestTablesAndSweep:
    def test_reference_data(self):
        ref = reference_tables()
        assert {r["table"] for r in ref} == {1, 2, 3}
        assert sum(r["table"] == 1 for r in ref) == 28

    def test_table3(self, run):
        res = run("tables", "3", "--no-timestamp")
        assert res.exit_code == 0
        assert "max rel err" in res.stderr
        body = rows(res.stdout)
        assert set(body[0]) == {"table", "alpha_over_pi", "quantity", "computed", "reference", "rel_err"}
        assert max(float(r["rel_err"]) for r in body) < 1e-3

    def test_sweep_schema(self, run):
        res = run("sweep", "--problem", "halfplane", "--delta", "0.2,0.5", "--no-timestamp")
        body = rows(res.output)
        assert list(body[0]) == SWEEP_COLUMNS
        assert [r["status"] for r in body] == ["ok", "ok"]

    def test_sweep_failure_recorded(self, run):
        res = run("sweep", "--problem", "halfplane", "--delta", "0.5,0.999", "--no-timestamp")
        assert res.exit_code == 0
        body = rows(res.output)
        assert body[0]["status"] == "ok"
        assert "TruncationError" in body[1]["status"]

    def test_sweep_workers_deterministic(self, run):
        args = ("sweep", "--alpha", "60:120:30deg", "--delta", "0.1", "--no-timestamp")
        assert run(*args).output == run(*args, "--workers", "2").output
