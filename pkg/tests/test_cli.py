import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from emerge import config, functions
from emerge.cli import main
from emerge.report import Report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_json(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestMerge:
    @pytest.mark.parametrize("argv,expected", [
        (["product", "2", "3"], "6"),
        (["ustat:2", "1", "2", "3"], "3.666666666666667"),
        (["symmetric2", "2", "2"], "3.333333333333333"),
        (["mean", "2", "0"], "1"),
        (["block:2", "2", "0", "1", "3"], "2"),
        (["counterexampleG:c=2", "2", "2"], "3"),
        (["counterexampleG:2", "0", "5"], "0"),
    ])
    def test_values(self, capsys, argv, expected):
        code, out, _ = run(capsys, "merge", *argv)
        assert code == 0 and out == expected + "\n"

    def test_trajectory(self, capsys):
        code, out, _ = run(capsys, "merge", "product", "2", "0.5", "3", "--trajectory")
        assert out.splitlines() == ["3", "0\t1", "1\t2", "2\t1", "3\t3"]

    def test_symmetric_trajectory_ends_at_value(self, capsys):
        _, out, _ = run(capsys, "merge", "symmetric2", "2", "2", "--trajectory")
        lines = out.splitlines()
        assert float(lines[-1].split("\t")[1]) == pytest.approx(float(lines[0]), rel=1e-15)

    def test_parse_error_position(self, capsys):
        code, _, err = run(capsys, "merge", "ustat:x", "1", "2")
        assert code == 3 and "position 6" in err

    def test_unknown_function(self, capsys):
        code, _, err = run(capsys, "merge", "median", "1", "2")
        assert code == 3 and "unknown function" in err

    def test_arity(self, capsys):
        code, _, err = run(capsys, "merge", "symmetric2", "1", "2", "3")
        assert code == 3 and "takes 2" in err

    def test_negative_evalue(self, capsys):
        code, _, _ = run(capsys, "merge", "product", "--", "-1", "2")
        assert code == 3

    def test_no_trajectory_for_G(self, capsys):
        code, _, _ = run(capsys, "merge", "counterexampleG:2", "1", "1", "--trajectory")
        assert code == 3

    def test_decomposed_file(self, capsys, tmp_path):
        path = write_json(tmp_path, "d.json", {"version": 1, "kind": "decomposed", "beta": 0.5, "a1": 1, "a2": 1,
                                                "g1": {"kind": "odds"}, "g2": {"kind": "odds"}})
        code, out, _ = run(capsys, "merge", f"decomposed:{path}", "2", "2")
        assert code == 0 and float(out) == pytest.approx(10 / 3, rel=1e-15)

    def test_generalized_file(self, capsys, tmp_path):
        doc = {"version": 1, "kind": "generalized", "K": 3, "components": [
            {"weight": 0.5, "reading": {"steps": [{"index": 1}, {"threshold": 1, "below": 2, "above": 3}, None]},
             "bets": [{"kind": "const", "value": 1}, {"kind": "const", "value": 0}, {"kind": "const", "value": 0}]},
            {"weight": 0.5, "reading": {"order": [3, 2, 1]},
             "bets": [{"kind": "const", "value": 1}, {"kind": "const", "value": 1}, {"kind": "const", "value": 1}]},
        ]}
        path = write_json(tmp_path, "g.json", doc)
        code, out, _ = run(capsys, "merge", f"generalized:{path}", "2", "8", "0.5", "--trajectory")
        assert code == 0
        assert float(out.splitlines()[0]) == pytest.approx(0.5 * 2 + 0.5 * 8)


class TestCertify:
    def test_se_product(self, capsys):
        code, out, _ = run(capsys, "certify", "se", "--function", "product", "--grid", "n=1,M=4")
        rep = Report.parse(out)
        assert code == 0 and rep.fields["f0"] == 1.0 and rep.fields["verdict"] == "certified-on-grid"

    def test_se_symmetric(self, capsys):
        code, out, _ = run(capsys, "certify", "se", "--function", "symmetric2", "--grid", "n=2,M=100")
        rep = Report.parse(out)
        assert code == 1 and rep.fields["f0"] > 1

    def test_se_budget(self, capsys):
        code, out, _ = run(capsys, "certify", "se", "--function", "product", "--k", "3", "--grid", "n=2,M=100")
        assert code == 2 and Report.parse(out).fields["verdict"] == "inconclusive"

    def test_se_full_table(self, capsys):
        _, out, _ = run(capsys, "certify", "se", "--function", "mean", "--grid", "n=0,M=2", "--full")
        rep = Report.parse(out)
        assert len(rep.sections["bets"]) == 1 + 3

    def test_ie_G(self, capsys):
        code, out, _ = run(capsys, "certify", "ie", "--function", "counterexampleG:c=2", "--atoms", "0,2", "--prob-steps", "100")
        rep = Report.parse(out)
        assert code == 0 and rep.fields["worst-mean"] == pytest.approx(1.0, abs=1e-9)
        assert rep.sections["witness"] == [(0.0, 2.0, 0.5), (0.0, 2.0, 0.5)]

    def test_ie_violation(self, capsys):
        code, _, _ = run(capsys, "certify", "ie", "--function", "counterexampleG:2", "--atoms", "0,1,2", "--prob-steps", "4",
                         "--k", "2")
        assert code == 0
        code, _, _ = run(capsys, "certify", "ie", "--function", "ustat:1", "--k", "4", "--atoms", "0,2")
        assert code == 2

    def test_anytime(self, capsys):
        code, out, _ = run(capsys, "certify", "anytime", "--function", "product", "--k", "3", "--runs", "20000",
                           "--stop", "threshold:2", "--stop", "below:1")
        rep = Report.parse(out)
        assert code == 0 and rep.fields["verdict"] == "consistent"
        assert len(rep.sections["stopped"]) == 2

    def test_anytime_needs_martingale(self, capsys):
        code, _, _ = run(capsys, "certify", "anytime", "--function", "symmetric2")
        assert code == 3

    def test_bad_grid(self, capsys):
        code, _, err = run(capsys, "certify", "se", "--function", "product", "--grid", "n=1,Q=4")
        assert code == 3 and "position 4" in err

    def test_report_file(self, capsys, tmp_path):
        path = tmp_path / "r.txt"
        code, out, _ = run(capsys, "certify", "se", "--function", "product", "--grid", "n=1,M=4", "--report", str(path))
        text = path.read_text()
        assert code == 0 and "exit 0" in out
        assert Report.parse(text).emit() == text


class TestReport:
    def test_round_trip(self):
        rep = Report({"mode": "ie", "f0": 1.2425990099009903, "K": 2, "flag": True, "atoms": (0.0, 2.0), "note": "a: b"},
                     {"witness": [(0.0, 2.0, 0.5)], "deviations": [("tau=x: 1.5 +- 0.01",)]})
        text = rep.emit()
        assert Report.parse(text).emit() == text

    @given(st.dictionaries(st.from_regex(r"[a-z][a-z\-]{0,8}", fullmatch=True),
                           st.one_of(st.floats(allow_nan=False), st.integers(), st.text("abc xyz:", max_size=8)), max_size=6),
           st.lists(st.tuples(st.floats(allow_nan=False), st.floats(allow_nan=False)), max_size=4))
    def test_round_trip_property(self, fields, rows):
        text = Report(fields, {"rows": rows}).emit()
        assert Report.parse(text).emit() == text

    def test_rejects_other_text(self):
        with pytest.raises(ValueError):
            Report.parse("hello\n")


class TestConfig:
    def test_unknown_key(self, tmp_path):
        path = write_json(tmp_path, "s.json", {"version": 1, "kind": "simulation", "horizon": 10})
        with pytest.raises(config.ConfigError, match="horizon"):
            config.simulation(config.load(path, "simulation"))

    def test_version_mandatory(self, tmp_path):
        path = write_json(tmp_path, "s.json", {"kind": "simulation"})
        with pytest.raises(config.ConfigError, match="version"):
            config.load(path, "simulation")

    def test_version_checked(self, tmp_path):
        path = write_json(tmp_path, "s.json", {"version": 2, "kind": "simulation"})
        with pytest.raises(config.ConfigError):
            config.load(path, "simulation")

    def test_kind_checked(self, tmp_path):
        path = write_json(tmp_path, "s.json", {"version": 1, "kind": "decomposed"})
        with pytest.raises(config.ConfigError):
            config.load(path, "simulation")

    def test_pwl_range(self):
        with pytest.raises(config.ConfigError):
            config.bet_function({"kind": "pwl", "x": [0, 1], "y": [0, 2]}, "g1")

    def test_pwl_interp(self):
        g = config.bet_function({"kind": "pwl", "x": [0, 2], "y": [0, 1]}, "g1")
        assert (g(-1), g(1), g(5)) == (0.0, 0.5, 1.0)

    def test_cli_reports_config_error(self, capsys, tmp_path):
        path = write_json(tmp_path, "s.json", {"version": 1, "kind": "simulation", "bogus": 1})
        code, _, err = run(capsys, "simulate", "--config", path, "--out", str(tmp_path))
        assert code == 3 and "bogus" in err

    def test_functions_parse_block_position(self):
        with pytest.raises(functions.FunctionSpecError) as info:
            functions.parse("block:1,x")
        assert info.value.position == 8


class TestSimulate:
    def test_files(self, capsys, tmp_path):
        code, out, _ = run(capsys, "simulate", "--k", "20", "--runs", "5", "--seed", "1", "--out", str(tmp_path))
        assert code == 0
        lines = (tmp_path / "mean.csv").read_text().splitlines()
        assert lines[0] == "step,fixed_true,fixed_misspecified,random_uniform,bayes,mle"
        assert len(lines) == 22
        assert lines[1] == "0,0,0,0,0,0"
        assert (tmp_path / "figure.svg").read_text().startswith("<svg")
        assert len(out.splitlines()) == 5

    def test_seventeen_digits(self, capsys, tmp_path):
        run(capsys, "simulate", "--k", "3", "--runs", "2", "--strategies", "mle", "--out", str(tmp_path), "--no-svg")
        value = (tmp_path / "mean.csv").read_text().splitlines()[-1].split(",")[1]
        assert format(float(value), ".17g") == value
        assert not (tmp_path / "figure.svg").exists()

    def test_one_run_equals_mean(self, capsys, tmp_path):
        run(capsys, "simulate", "--k", "30", "--runs", "1", "--out", str(tmp_path))
        assert (tmp_path / "one_run.csv").read_text() == (tmp_path / "mean.csv").read_text()

    def test_config_file_and_override(self, capsys, tmp_path):
        path = write_json(tmp_path, "s.json", {"version": 1, "kind": "simulation", "K": 7, "runs": 2, "strategies": ["bayes"]})
        run(capsys, "simulate", "--config", path, "--k", "4", "--out", str(tmp_path))
        lines = (tmp_path / "mean.csv").read_text().splitlines()
        assert lines[0] == "step,bayes" and len(lines) == 6

    def test_bad_strategy(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "--strategies", "oracle", "--out", str(tmp_path))
        assert code == 3
