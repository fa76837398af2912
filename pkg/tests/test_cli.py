import io
import json

import pytest

from mpqp.cli import fmt, main, parse_vector, CliError

P1_SWEEP = (
    "t,x_1,V,gradV_1,region_active_set,boundary_flag\n"
    "0.0,-2.0,0.0,0.0,{},0\n"
    "0.25,-1.0,0.0,0.0,{},0\n"
    "0.5,0.0,0.0,0.0,{},1\n"
    "0.75,1.0,0.5,1.0,{1},0\n"
    "1.0,2.0,2.0,2.0,{1},0\n"
)


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


class TestFormatting:
    def test_shortest_round_trip(self):
        assert fmt(0.1) == "0.1"
        assert fmt(2) == "2.0"
        assert float(fmt(1 / 3)) == 1 / 3

    def test_negative_zero(self):
        assert fmt(-0.0) == "0.0"

    def test_parse_vector(self):
        assert parse_vector("-3,0.5", 2).tolist() == [-3.0, 0.5]
        with pytest.raises(CliError):
            parse_vector("1,2", 1)
        with pytest.raises(CliError):
            parse_vector("nan", 1)


class TestSolve:
    def test_active(self, problem_files):
        code, out = run(["solve", problem_files["p1"], "--x", "2"])
        assert code == 0
        assert "z* 2.0\n" in out and "lambda* 2.0\n" in out
        assert "V 2.0\n" in out and "active_set {1}\n" in out

    def test_unconstrained_region(self, problem_files):
        code, out = run(["solve", problem_files["p1"], "--x", "-1"])
        assert code == 0
        assert "z* 0.0\n" in out and "V 0.0\n" in out and "active_set {}\n" in out

    def test_parse_error(self, problem_files, capsys):
        code, _ = run(["solve", problem_files["p1"], "--x", "a"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_json_and_negative_vector(self, problem_files):
        code, out = run(["solve", problem_files["p2"], "--x", "-3,0", "--json"])
        doc = json.loads(out)
        assert code == 0
        assert doc["z_star"] == [-2.0, 0.0]
        assert doc["active_set"] == [1]

    def test_infeasible(self, tmp_path):
        path = tmp_path / "gap.json"
        path.write_text('{"s":1,"m":2,"n":1,"H":[[1.0]],"G":[[1.0],[-1.0]],"W":[1.0,0.0],"S":[[0.0],[-1.0]]}')
        code, out = run(["solve", str(path), "--x", "2"])
        assert code == 2
        assert out == "status Infeasible\n"

    def test_missing_file(self, tmp_path, capsys):
        code, _ = run(["solve", str(tmp_path / "none.json"), "--x", "1"])
        assert code == 1
        assert "cannot read" in capsys.readouterr().err

    def test_invalid_problem(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"s":2,"m":0,"n":1,"H":[[1,2],[2,1]],"G":[],"W":[],"S":[]}')
        assert run(["solve", str(path), "--x", "1"])[0] == 1
        assert "error" in capsys.readouterr().err

    def test_usage_error_exit_code(self, problem_files):
        with pytest.raises(SystemExit) as exc:
            main(["solve", problem_files["p1"], "--bogus"])
        assert exc.value.code == 1


class TestRegions:
    @pytest.mark.parametrize("name, count", [("p1", 2), ("p2", 4), ("free", 1)])
    def test_counts(self, problem_files, capsys, name, count):
        code, out = run(["regions", problem_files[name]])
        assert code == 0
        assert len(json.loads(out)["regions"]) == count
        assert capsys.readouterr().err.startswith(f"{count} regions")

    def test_p1_summary(self, problem_files, capsys):
        run(["regions", problem_files["p1"]])
        assert capsys.readouterr().err == "2 regions: {} {1}\n"


class TestGrad:
    @pytest.mark.parametrize("route", ["region", "multiplier", "generic"])
    def test_analytic_routes(self, problem_files, route):
        assert run(["grad", problem_files["p1"], "--x", "2", "--route", route]) == (0, "2.0\n")

    def test_flat_region(self, problem_files):
        assert run(["grad", problem_files["p1"], "--x", "-3"]) == (0, "0.0\n")

    def test_fd(self, problem_files):
        code, out = run(["grad", problem_files["p1"], "--x", "2", "--route", "fd"])
        assert code == 0
        assert abs(float(out) - 2.0) <= 1e-6

    def test_boundary_warning(self, problem_files, capsys):
        code, out = run(["grad", problem_files["p1"], "--x", "0"])
        assert (code, out) == (0, "0.0\n")
        assert "boundary" in capsys.readouterr().err

    def test_vector_output(self, problem_files):
        assert run(["grad", problem_files["p2"], "--x", "-3,0"]) == (0, "-2.0 0.0\n")

    def test_infeasible(self, tmp_path):
        path = tmp_path / "gap.json"
        path.write_text('{"s":1,"m":2,"n":1,"H":[[1.0]],"G":[[1.0],[-1.0]],"W":[1.0,0.0],"S":[[0.0],[-1.0]]}')
        assert run(["grad", str(path), "--x", "2"])[0] == 2


class TestCheck:
    def test_p1(self, problem_files):
        code, out = run(["check", problem_files["p1"], "--seed", "42", "--samples", "100"])
        assert code == 0
        assert out.endswith("all checks passed\n")

    def test_json(self, problem_files):
        code, out = run(["check", problem_files["p2"], "--json"])
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_duplicated_rows(self, problem_files):
        code, out = run(["check", problem_files["dup"], "--json"])
        doc = json.loads(out)
        assert code == 0
        assert {c["name"] for c in doc["checks"] if c["status"] == "Skip"} == {
            "multiplier_agreement", "oracle_lambda", "partition", "continuity"}

    def test_failure_exit_code(self, problem_files, monkeypatch):
        from mpqp import cli
        from mpqp.checks import CheckReport

        def failing(*args, **kwargs):
            rep = CheckReport()
            rep.add("kkt", 1.0, 1e-7)
            return rep

        monkeypatch.setattr(cli, "run_checks", failing)
        assert run(["check", problem_files["p1"]])[0] == 3


class TestSweep:
    def test_p1_exact(self, problem_files):
        assert run(["sweep", problem_files["p1"], "--from", "-2", "--to", "2", "--steps", "5"]) == (0, P1_SWEEP)

    def test_file_output(self, problem_files, tmp_path):
        path = tmp_path / "sweep.csv"
        code, out = run(["sweep", problem_files["p1"], "--from", "-2", "--to", "2", "--steps", "5",
                         "--out", str(path)])
        assert (code, out) == (0, "")
        assert path.read_text() == P1_SWEEP

    def test_two_steps_are_endpoints(self, problem_files):
        _, out = run(["sweep", problem_files["p2"], "--from", "-3,0", "--to", "1,-2", "--steps", "2"])
        lines = out.splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("0.0,-3.0,0.0,")
        assert lines[2].startswith("1.0,1.0,-2.0,")

    def test_rows_increase_in_t(self, problem_files):
        _, out = run(["sweep", problem_files["p2"], "--from", "-3,-3", "--to", "3,3", "--steps", "13"])
        ts = [float(line.split(",")[0]) for line in out.splitlines()[1:]]
        assert len(ts) == 13
        assert all(a < b for a, b in zip(ts, ts[1:]))

    def test_infeasible_gap(self, tmp_path):
        path = tmp_path / "gap.json"
        path.write_text('{"s":1,"m":2,"n":1,"H":[[1.0]],"G":[[1.0],[-1.0]],"W":[1.0,0.0],"S":[[0.0],[-1.0]]}')
        _, out = run(["sweep", str(path), "--from", "0", "--to", "2", "--steps", "3"])
        assert out.splitlines()[-1] == "1.0,2.0,,,,0"

    def test_unwritable(self, problem_files, tmp_path):
        code, _ = run(["sweep", problem_files["p1"], "--from", "-2", "--to", "2", "--steps", "5",
                       "--out", str(tmp_path / "missing" / "x.csv")])
        assert code == 1

    def test_steps_validated(self, problem_files):
        assert run(["sweep", problem_files["p1"], "--from", "0", "--to", "1", "--steps", "1"])[0] == 1

    def test_byte_identical_runs(self, problem_files):
        argv = ["sweep", problem_files["p2"], "--from", "-3,-2", "--to", "2,1", "--steps", "9"]
        assert run(argv) == run(argv)
