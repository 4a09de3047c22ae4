import csv
import io
import json

import pytest

from proxkit.cli import run

CHECK_PASS = ["check", "--function", "lambda_abs", "--xbar", "0", "--lambdabar", "1", "--vbar", "0",
              "--eps", "0.5", "--r", "0"]
CHECK_FAIL = ["check", "--function", "lambda_abs", "--xbar", "0", "--lambdabar", "-1", "--vbar", "1",
              "--eps", "0.5", "--r", "10"]


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("PROXKIT_SEED", raising=False)


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_catalog_lists_entries(capsys):
    assert run(["catalog"]) == 0
    ids = {e["id"] for e in out_json(capsys)["catalog"]}
    assert {"abs", "lambda_abs", "neg_abs", "quad_minus_abs", "indicator_unit_interval"} <= ids


def test_check_pass(capsys):
    assert run(CHECK_PASS) == 0
    rep = out_json(capsys)
    assert rep["verdict"] == "pass" and rep["seed"] == 0 and rep["witness"] is None


def test_check_fail_and_replay(tmp_path, capsys):
    report = tmp_path / "report.json"
    assert run(CHECK_FAIL + ["-o", str(report)]) == 1
    rep = out_json(capsys)
    assert rep["verdict"] == "fail" and rep["witness"]["margin"] < 0
    assert json.loads(report.read_text()) == rep
    assert run(["check", "--function", "lambda_abs", "--replay-witness", str(report)]) == 1
    replay = out_json(capsys)
    assert replay["reproduced"] and abs(replay["replayed_margin"] - replay["reported_margin"]) <= 1e-12


def test_replay_on_a_function_that_satisfies_it(tmp_path, capsys):
    report = tmp_path / "report.json"
    assert run(CHECK_FAIL + ["-o", str(report)]) == 1
    capsys.readouterr()
    assert run(["check", "--function", "shift_abs", "--replay-witness", str(report)]) == 0
    assert out_json(capsys)["reproduced"] is False


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(CHECK_FAIL + ["--seed", "7", "-o", str(a)])
    run(CHECK_FAIL + ["--seed", "7", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_env_seed_overrides_flag(monkeypatch, capsys):
    monkeypatch.setenv("PROXKIT_SEED", "11")
    run(CHECK_PASS + ["--seed", "3"])
    assert out_json(capsys)["seed"] == 11


def test_inconclusive_exit_code(capsys):
    assert run(["check", "--function", "abs", "--vbar", "0", "--eps", "0.001", "--r", "0"]) == 3
    assert out_json(capsys)["verdict"] == "inconclusive"


def test_monotone_and_subgradient_kinds(capsys):
    assert run(CHECK_PASS + ["--kind", "monotone"]) == 0
    assert run(["check", "--function", "neg_abs", "--vbar", "1", "--eps", "0.5", "--r", "100",
                "--kind", "subgradient"]) == 1


def test_spec_file_function(tmp_path, capsys):
    spec = tmp_path / "abs.json"
    spec.write_text(json.dumps({"breakpoints": [0.0], "pieces": [[0, -1], [0, 1]], "tag": "convex"}))
    assert run(["check", "--function", str(spec), "--vbar", "0", "--eps", "1.5", "--r", "0"]) == 0


def test_errors_exit_2(tmp_path, capsys):
    assert run(["check", "--function", "no_such_function"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "pieces": [[0],\n}')
    assert run(["check", "--function", str(bad)]) == 2
    assert "line" in capsys.readouterr().err
    assert run(["check", "--function", "abs", "--vbar", "3"]) == 2
    with pytest.raises(SystemExit) as exc:
        run(["check"])
    assert exc.value.code == 2


def test_search(capsys):
    assert run(["search", "--function", "lambda_abs", "--lambdabar", "1", "--vbar", "0"]) == 0
    rep = out_json(capsys)
    assert rep["found"] and rep["certificate"]["r"] == 0.0
    assert run(["search", "--function", "neg_abs", "--vbar", "1"]) == 1
    assert out_json(capsys)["found"] is False


def test_calculus_rules(capsys):
    assert run(["calculus", "--rule", "scalar", "--input", '{"params": [[0.5, 2]], "lambda": 3}']) == 0
    assert out_json(capsys)["params"] == {"eps": 0.5, "r": 6.0}
    assert run(["calculus", "--rule", "para-sum", "--input",
                '{"params": [[0.4, 1], [0.4, 1]], "lambda": [1, 2]}']) == 0
    assert out_json(capsys)["params"] == {"eps": 0.2, "r": 6.0}
    assert run(["calculus", "--rule", "para-max", "--input",
                '{"params": [[1, 1]], "lambda": [1], "functions": ["abs"]}']) == 2


def test_calculus_validate(tmp_path, capsys):
    spec = tmp_path / "in.json"
    spec.write_text(json.dumps({"params": [[1.0, 0.0], [1.0, 1.0]], "lambda": [0.8, 1.2],
                                "functions": ["abs", "double_well"], "xbar": [0.3]}))
    assert run(["calculus", "--rule", "para-sum", "--input", str(spec), "--validate"]) == 0
    rep = out_json(capsys)
    assert rep["validation"]["verdict"] == "pass"
    assert run(["calculus", "--rule", "amenable", "--validate", "--input",
                '{"params": [[1.0, 1.0], [1.0, 0.0]], "functions": ["double_well", "abs"], "eps": 0.5}']) == 0
    rep = out_json(capsys)
    assert rep["params"]["r"] == pytest.approx(2.0) and rep["validation"]["verdict"] == "pass"


def test_pa_csv(tmp_path):
    path = tmp_path / "pa.csv"
    assert run(["pa", "--f0", "quad", "--f1", "abs", "--points", "401", "--box", "-2", "2",
                "--lambdas", "0.5", "-o", str(path)]) == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert len(rows) == 401
    for row in rows[1:-1]:
        assert abs(float(row["pa_convex"]) - float(row["pa_convex_env"])) <= 1e-3
        assert row["nc_pa"] != ""
