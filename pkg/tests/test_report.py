"""Tests for versioned reports and their writers."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from umbilic4.config import RunConfig
from umbilic4.errors import ValidationError
from umbilic4.field import AlgebraicScalar
from umbilic4.report import SCHEMA_VERSION, canonical_json, jsonable, make_report, to_csv, write_report


class TestJsonable:
    """Tests for conversion to plain JSON data."""

    def test_numpy(self):
        data = jsonable({"a": np.array([1.0, 2.0]), "b": np.int64(3), "c": np.bool_(True)})
        assert data == {"a": [1.0, 2.0], "b": 3, "c": True}
        assert isinstance(data["c"], bool)

    def test_non_finite(self):
        assert jsonable([math.nan, math.inf, -math.inf]) == ["nan", "inf", "-inf"]

    def test_exact_numbers(self):
        assert jsonable(Fraction(1, 3)) == "1/3"
        assert jsonable(AlgebraicScalar(0, 0, 2, 0)) == str(AlgebraicScalar(0, 0, 2, 0))

    def test_to_json_objects(self):
        class Box:
            def to_json(self):
                return {"x": (1, 2)}

        assert jsonable(Box()) == {"x": [1, 2]}


class TestDigest:
    """Tests for the canonical digest."""

    def test_canonical_floats(self):
        assert canonical_json({"b": 0.1, "a": 1}) == '{"a":1,"b":"0.10000000000000001"}'

    def test_timing_is_excluded(self):
        a = make_report("torus scan", RunConfig(), {"max_order": 6}, elapsed=0.5)
        b = make_report("torus scan", RunConfig(), {"max_order": 6}, elapsed=9.0)
        assert a.digest == b.digest
        assert a.to_json()["timing"] != b.to_json()["timing"]

    def test_results_change_digest(self):
        a = make_report("torus scan", RunConfig(), {"max_order": 6})
        b = make_report("torus scan", RunConfig(), {"max_order": 5})
        assert a.digest != b.digest

    def test_seed_changes_digest(self):
        a = make_report("torus scan", RunConfig(seed=0), {})
        b = make_report("torus scan", RunConfig(seed=1), {})
        assert a.digest != b.digest

    def test_body(self):
        data = make_report("eds gc", RunConfig(), {}, {"ok": True, "bad": False}).to_json()
        assert data["schema_version"] == SCHEMA_VERSION
        assert data["summary"] == {"passed": 1, "failed": 1, "ok": False}
        assert len(data["digest"]) == 64
        assert "effective_tolerances" in data["config"]


class TestWriters:
    """Tests for json, csv and pretty output."""

    def test_csv_rows(self):
        rows = [{"order": 6, "r": "2/3", "s": "1/6"}, {"order": 5, "r": "3/5", "s": "1/5"}]
        report = make_report("torus scan", RunConfig(), {}, rows=rows)
        lines = to_csv(report).splitlines()
        assert lines[0] == "order,r,s"
        assert lines[1] == "6,2/3,1/6"
        assert len(lines) == 3

    def test_csv_key_value(self):
        report = make_report("eds gc", RunConfig(), {"gauss": 0.5, "h": [1, 2]})
        lines = to_csv(report).splitlines()
        assert lines[0] == "key,value"
        assert "gauss,0.5" in lines
        assert "h,1;2" in lines

    def test_json_file(self, tmp_path):
        path = tmp_path / "out.json"
        report = make_report("torus scan", RunConfig(), {"max_order": 6})
        write_report(report, "json", path)
        data = json.loads(path.read_text())
        assert data["results"] == {"max_order": 6}
        assert data["digest"] == report.digest

    def test_pretty_file(self, tmp_path):
        path = tmp_path / "out.txt"
        write_report(make_report("torus scan", RunConfig(), {"max_order": 6}), "pretty", path)
        assert "max_order" in path.read_text()

    def test_unknown_format(self):
        with pytest.raises(ValidationError):
            write_report(make_report("torus scan", RunConfig(), {}), "xml")
