import csv
import io
import json
import math
from unittest.mock import patch

import pytest

from ultralab import __version__
from ultralab.cli import _attach_values, build_parser, main, run
from ultralab.exceptions import AccuracyError
from ultralab.reports import build_report, write_json
from ultralab.worker import EX_NUMERIC, EX_OK, EX_USAGE, EX_VIOLATION

LAPLACE = "1*D[2,0]+1*D[0,2]"


@pytest.fixture(autouse=True)
def setup_logging():
    with patch("ultralab.utils.logging.setup_logging") as setup_logging:
        yield setup_logging


@pytest.fixture()
def out(tmp_path):
    return tmp_path / "report"


class Console:
    def __init__(self):
        self.stdout = io.StringIO()
        self.stderr = io.StringIO()

    def __call__(self, *argv):
        return run(list(argv), stdout=self.stdout, stderr=self.stderr)


@pytest.fixture()
def console():
    return Console()


def read_json(out):
    return json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))


def read_csv(out):
    with out.with_suffix(".csv").open(encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


class test_attach_values:
    def test_joins_list_flags(self):
        assert _attach_values(["op", "ellipticity", "--box", "-1,1,-1,1"]) == [
            "op",
            "ellipticity",
            "--box=-1,1,-1,1",
        ]

    def test_other_flags_untouched(self):
        assert _attach_values(["--jmax", "3", "--x", "-0.5"]) == ["--jmax", "3", "--x=-0.5"]

    def test_trailing_flag(self):
        assert _attach_values(["--box"]) == ["--box"]


class test_parser:
    def test_groups(self):
        args = build_parser().parse_args(["weights", "prop21", "gevrey:s=2", "--jmax", "12"])
        assert args.group == "weights"
        assert args.action == "prop21"
        assert args.weight == "gevrey:s=2"
        assert args.jmax == 12

    def test_global_flags_after_subcommand(self):
        args = build_parser().parse_args(["op", "parse", LAPLACE, "--dry-run", "--seed", "3"])
        assert args.dry_run
        assert args.seed == 3

    def test_version(self, console, capsys):
        assert console("--version") == EX_OK
        assert __version__ in capsys.readouterr().out


class test_usage_errors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["bogus"],
            ["weights"],
            ["op", "parse", LAPLACE, "--seed", "many"],
            ["weights", "prop21", "gevrey:s=2", "--jmax", "-1"],
            ["op", "parse", "1*D[2,0] +"],
            ["op", "symbol", LAPLACE, "--x", "0,0"],
            ["op", "iterate", "1*D[1]", "--power", "-1"],
        ],
    )
    def test_exit_usage(self, console, argv):
        assert console(*argv) == EX_USAGE
        assert console.stderr.getvalue()

    def test_compose_needs_two_operators(self, console, out):
        assert console("op", "compose", LAPLACE, "--out", str(out)) == EX_USAGE
        assert "needs two operators" in console.stderr.getvalue()

    def test_metivier_constraint(self, console):
        assert console("metivier", "run", "--eps", "0.5", "--dry-run") == EX_USAGE
        assert "ConstraintError" in console.stderr.getvalue()

    def test_missing_config(self, console, tmp_path):
        assert console("--config", str(tmp_path / "nope.ini"), "op", "parse", LAPLACE) == EX_USAGE


class test_op:
    def test_parse(self, console, out):
        assert console("op", "parse", LAPLACE, "--out", str(out)) == EX_OK
        report = read_json(out)
        assert report["command"] == "op parse"
        assert report["status"] == "ok"
        assert report["result"]["text"] == "1*D[0,2] + 1*D[2,0]"
        assert report["result"]["order"] == 2
        assert [row["alpha"] for row in read_csv(out)] == ["0,2", "2,0"]
        assert "op parse: ok" in console.stdout.getvalue()

    def test_compose(self, console, out):
        assert console("op", "compose", "x1*d[1]", "1*d[1]", "--out", str(out)) == EX_OK
        assert read_json(out)["result"]["d_form"] == "x1*d[2]"

    def test_iterate(self, console, out):
        assert console("op", "iterate", "1*d[1]", "--power", "3", "--out", str(out)) == EX_OK
        result = read_json(out)["result"]
        assert result["power"] == 3
        assert result["d_form"] == "1*d[3]"

    def test_symbol(self, console, out):
        argv = ("op", "symbol", LAPLACE, "--x", "-0.5,0.5", "--xi", "0.6,0.8", "--out", str(out))
        assert console(*argv) == EX_OK
        (row,) = read_csv(out)
        assert float(row["abs"]) == pytest.approx(1.0)

    def test_symbol_one_dimensional(self, console, out):
        argv = ("op", "symbol", "1*D[2]", "--x", "0.3", "--xi", "2", "--out", str(out))
        assert console(*argv) == EX_OK
        (row,) = read_csv(out)
        assert float(row["abs"]) == pytest.approx(4.0)

    def test_one_dimensional_ignores_default_box(self, console, out):
        assert console("op", "parse", "1*D[2]", "--out", str(out)) == EX_OK
        assert read_json(out)["result"]["dim"] == 1

    def test_ellipticity_box_mismatch(self, console):
        assert console("op", "ellipticity", "1*D[2]", "--box", "-1,1,-1,1") == EX_USAGE
        assert "dimension 1 but the box has 2" in console.stderr.getvalue()

    def test_ellipticity(self, console, out):
        argv = ("op", "ellipticity", LAPLACE, "--box", "-1,1,-1,1", "--out", str(out))
        assert console(*argv) == EX_OK
        result = read_json(out)["result"]
        assert result["verdict"] == "elliptic"
        assert result["sampled"]
        assert result["c_min"] == pytest.approx(1.0)

    def test_dry_run_writes_nothing(self, console, out):
        assert console("op", "parse", LAPLACE, "--out", str(out), "--dry-run") == EX_OK
        assert "dry run" in console.stdout.getvalue()
        assert not out.with_suffix(".json").exists()

    def test_quiet(self, console, out):
        assert console("op", "parse", LAPLACE, "--out", str(out), "-q") == EX_OK
        assert console.stdout.getvalue() == ""
        assert out.with_suffix(".json").exists()

    def test_config_file(self, console, out, tmp_path):
        config = tmp_path / "lab.ini"
        config.write_text(
            f"[operator]\noperator = 1*d[1,1]\n\n[output]\nout = {out}\ncsv = false\n",
            encoding="utf-8",
        )
        assert console("--config", str(config), "op", "parse") == EX_OK
        assert read_json(out)["result"]["d_form"] == "1*d[1,1]"
        assert read_json(out)["config"]["csv"] is False
        assert not out.with_suffix(".csv").exists()


class test_analyze:
    def argv(self, action, out, *extra):
        return (
            "analyze",
            action,
            "--op",
            LAPLACE,
            "--fn",
            "sin(pi*x1)*sin(pi*x2)",
            "--box",
            "0,1,0,1",
            "--nodes",
            "33",
            "--out",
            str(out),
            *extra,
        )

    def test_norms(self, console, out):
        assert console(*self.argv("norms", out, "--jmax", "2")) == EX_OK
        rows = read_csv(out)
        norms = [float(row["norm"]) for row in rows]
        lam = 2 * math.pi**2
        assert norms == pytest.approx([0.5, 0.5 * lam, 0.5 * lam**2], rel=1e-5)

    def test_numeric_failure(self, console, out):
        with patch("ultralab.cli.iterate_norms") as iterate_norms:
            iterate_norms.side_effect = AccuracyError("quadrature", 1e-3)
            assert console(*self.argv("norms", out)) == EX_NUMERIC
        assert "AccuracyError" in console.stderr.getvalue()

    def test_npm(self, console, out):
        assert console(*self.argv("npm", out, "--p", "1", "--m", "1")) == EX_OK
        (row,) = read_csv(out)
        assert float(row["value"]) > 0

    def test_norms_one_dimensional(self, console, out):
        argv = (
            "analyze", "norms", "--op", "1*D[2]", "--fn", "sin(pi*x1)",
            "--box", "0,1", "--nodes", "33", "--jmax", "1", "--out", str(out),
        )
        assert console(*argv) == EX_OK
        norms = [float(row["norm"]) for row in read_csv(out)]
        assert norms == pytest.approx([math.sqrt(0.5), math.pi**2 * math.sqrt(0.5)], rel=1e-5)

    def test_box_mismatch(self, console, out):
        argv = ("analyze", "norms", "--op", "1*D[2]", "--fn", "sin(pi*x1)", "--out", str(out))
        assert console(*argv) == EX_USAGE
        assert "dimension 1 but the box has 2" in console.stderr.getvalue()


class test_weights:
    def test_prop21_holds(self, console, out):
        assert console("weights", "prop21", "gevrey:s=2", "--jmax", "20", "--out", str(out)) == EX_OK
        report = read_json(out)
        assert report["status"] == "ok"
        assert report["result"]["suite"]["violations"] == []
        assert all(s["verified"] for s in report["result"]["shift"])

    @pytest.mark.slow
    def test_prop21_default_jmax(self, console, out):
        assert console("weights", "prop21", "gevrey:s=2", "--jmax", "60", "--out", str(out)) == EX_OK
        assert read_json(out)["result"]["suite"]["counts"].get("superadditive", 0) == 0

    def test_prop21_dry_run(self, console):
        assert console("weights", "prop21", "gevrey:s=2", "--dry-run") == EX_OK


class test_report_merge:
    def test_worst_status(self, console, out, tmp_path):
        a = write_json(tmp_path / "a.json", build_report("op parse", {}))
        b = write_json(tmp_path / "b.json", build_report("weights prop21", {}, status="violation"))
        assert console("report", "merge", str(a), str(b), "--out", str(out)) == EX_VIOLATION
        report = read_json(out)
        assert report["status"] == "violation"
        assert [r["command"] for r in report["result"]["reports"]] == ["op parse", "weights prop21"]

    def test_all_ok(self, console, out, tmp_path):
        a = write_json(tmp_path / "a.json", build_report("op parse", {}))
        b = write_json(tmp_path / "b.json", build_report("op iterate", {}))
        assert console("report", "merge", str(a), str(b), "--out", str(out)) == EX_OK
        assert read_json(out)["status"] == "ok"

    def test_bad_input(self, console, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{}", encoding="utf-8")
        assert console("report", "merge", str(path)) == EX_USAGE


class test_metivier:
    def test_dry_run(self, console):
        assert console("metivier", "run", "--dry-run", "--m", "2") == EX_OK

    def test_run_without_control(self, console, out):
        assert console("metivier", "run", "--no-control", "--out", str(out)) == EX_OK
        result = read_json(out)["result"]
        assert result["report"]["verdict"] == "counterexample"
        assert result["control"] is None
        assert {row["run"] for row in read_csv(out)} == {"main"}

    @pytest.mark.slow
    def test_default_run(self, console, out):
        assert console("metivier", "run", "--out", str(out)) == EX_OK
        result = read_json(out)["result"]
        assert result["report"]["verdict"] == "counterexample"
        assert result["control"]["verdict"] == "no counterexample"
        assert {row["run"] for row in read_csv(out)} == {"main", "control"}


def test_main():
    with patch("ultralab.cli.run", return_value=EX_VIOLATION) as run_:
        with pytest.raises(SystemExit) as excinfo:
            main(["op", "parse", LAPLACE])
    assert excinfo.value.code == EX_VIOLATION
    run_.assert_called_once_with(["op", "parse", LAPLACE])
