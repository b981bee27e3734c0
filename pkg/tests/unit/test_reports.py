import json
import math
from dataclasses import dataclass

import numpy as np
import pytest
from freezegun import freeze_time

from ultralab.exceptions import ConfigError
from ultralab.reports import (
    SCHEMA_VERSION,
    build_report,
    csv_text,
    dumps,
    jsonable,
    load_report,
    merge_reports,
    write_csv,
    write_json,
)


@dataclass
class Row:
    j: int
    value: float

    def as_dict(self):
        return {"j": self.j, "value": self.value}


class test_jsonable:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (np.float64(1.5), 1.5),
            (np.int64(3), 3),
            (np.bool_(True), True),
            (math.inf, "inf"),
            (-math.inf, "-inf"),
            (math.nan, "nan"),
            (1 + 2j, {"re": 1.0, "im": 2.0}),
            (np.array([1, 2]), [1, 2]),
            ((1, 2.5), [1, 2.5]),
            ({1: "a"}, {"1": "a"}),
            ("text", "text"),
            (None, None),
        ],
    )
    def test_values(self, value, expected):
        assert jsonable(value) == expected

    def test_as_dict(self):
        assert jsonable([Row(1, math.inf)]) == [{"j": 1, "value": "inf"}]

    def test_bool_is_not_int(self):
        assert jsonable(True) is True


class test_build_report:
    @freeze_time("2026-03-01 12:30:45.123456")
    def test_timestamp(self):
        report = build_report("prop21", {"holds": True})
        assert report["generated_at"] == "2026-03-01T12:30:45+00:00"

    def test_fields(self):
        report = build_report(
            "metivier", [Row(0, 1.0)], config={"eps": 0.1}, status="violation", generated_at="t"
        )
        assert report == {
            "schema_version": SCHEMA_VERSION,
            "generated_at": "t",
            "command": "metivier",
            "status": "violation",
            "config": {"eps": 0.1},
            "result": [{"j": 0, "value": 1.0}],
        }

    def test_no_config(self):
        assert build_report("axioms", {}, generated_at="t")["config"] is None

    def test_dumps_is_sorted_json(self):
        text = dumps(build_report("axioms", {"b": 1, "a": math.nan}, generated_at="t"))
        assert text.endswith("}\n")
        data = json.loads(text)
        assert data["result"] == {"a": "nan", "b": 1}
        assert text.index('"command"') < text.index('"status"')


class test_files:
    def test_json_roundtrip(self, tmp_path):
        report = build_report("growth", {"rows": [1, 2]}, generated_at="t")
        path = write_json(tmp_path / "out" / "report.json", report)
        assert path.exists()
        assert load_report(path) == report

    def test_load_missing(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read report"):
            load_report(tmp_path / "missing.json")

    def test_load_not_a_report(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="is not a report"):
            load_report(path)

    def test_load_wrong_schema(self, tmp_path):
        path = tmp_path / "old.json"
        path.write_text(json.dumps({"schema_version": 0}), encoding="utf-8")
        with pytest.raises(ConfigError, match="schema version 0"):
            load_report(path)

    def test_csv_text(self):
        text = csv_text([{"j": 0, "norm": 1.0}, {"j": 1, "extra": math.inf}])
        assert text.splitlines() == ["j,norm,extra", "0,1.0,", "1,,inf"]

    def test_csv_columns(self):
        text = csv_text([Row(0, 0.5)], columns=["value"])
        assert text == "value\n0.5\n"

    def test_write_csv(self, tmp_path):
        path = write_csv(tmp_path / "table.csv", [Row(0, 0.5), Row(1, 0.25)])
        assert path.read_text(encoding="utf-8") == "j,value\n0,0.5\n1,0.25\n"


class test_merge_reports:
    def test_worst_status_wins(self):
        reports = [
            build_report("a", {}, generated_at="t"),
            build_report("b", {}, status="violation", generated_at="t"),
        ]
        merged = merge_reports(reports, generated_at="t")
        assert merged["status"] == "violation"
        assert merged["command"] == "report merge"
        assert [r["command"] for r in merged["result"]["reports"]] == ["a", "b"]

    def test_failure(self):
        reports = [
            build_report("a", {}, status="failure", generated_at="t"),
            build_report("b", {}, status="violation", generated_at="t"),
        ]
        assert merge_reports(reports)["status"] == "failure"

    def test_empty(self):
        merged = merge_reports([], generated_at="t")
        assert merged["status"] == "ok"
        assert merged["result"] == {"reports": []}
