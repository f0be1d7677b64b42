import json
import math

import pytest

from mgtheta.cli import EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, load_suite, main
from mgtheta.ingest import bundled_expression, expression_to_document


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ingest_table_order(capsys):
    code, out, _ = run(capsys, "ingest", "chsh")
    assert code == EXIT_OK
    rows = [line.split() for line in out.splitlines()[1:]]
    assert [r[1] for r in rows] == ["00|00", "11|01", "10|11", "00|10", "11|00", "00|01", "01|11", "11|10"]
    assert [r[0] for r in rows] == [str(i) for i in range(1, 9)]


def test_ingest_pent2_marginal_event(capsys):
    code, out, _ = run(capsys, "ingest", "pent2")
    assert code == EXIT_OK
    assert out.splitlines()[5].split()[:2] == ["5", "_1|_0"]


def test_ingest_file_round_trip(capsys, tmp_path):
    expr = tmp_path / "pent1.json"
    expr.write_text(json.dumps(expression_to_document(bundled_expression("pent1"))))
    mgfile = tmp_path / "pent1_mg.json"
    code, _, _ = run(capsys, "ingest", str(expr), "--out", str(mgfile), "--format", "json")
    assert code == EXIT_OK and mgfile.is_file()
    code, out, _ = run(capsys, "bounds", "alpha", str(mgfile))
    assert code == EXIT_OK and json.loads(out)["value"] == 2


def test_ingest_empty_file_is_input_error(capsys, tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    code, _, err = run(capsys, "ingest", str(empty))
    assert code == EXIT_INPUT
    assert "empty" in err


def test_bounds_theta_pent1(capsys):
    code, out, _ = run(capsys, "bounds", "theta", "pent1")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(math.sqrt(5), abs=1e-6)
    assert doc["gls_value"] == pytest.approx(doc["value"], abs=1e-6)


def test_bounds_alpha_i3322(capsys):
    code, out, _ = run(capsys, "bounds", "alpha", "i3322csw", "--format", "text")
    assert code == EXIT_OK
    assert out.startswith("alpha(i3322csw) = 6")


def test_bounds_mtheta_writes_report(capsys, tmp_path):
    dest = tmp_path / "rep.json"
    code, _, _ = run(capsys, "bounds", "mtheta", "pent1", "--level", "1", "--out", str(dest))
    assert code == EXIT_OK
    doc = json.loads(dest.read_text())
    assert doc["level"] == "1" and doc["alpha"] == 2
    assert doc["bound"] >= 2 and len(doc["per_trial"]) == 1


def test_bounds_input_errors(capsys, tmp_path):
    assert run(capsys, "bounds", "alpha", "nosuchinstance")[0] == EXIT_INPUT
    assert run(capsys, "bounds", "mtheta", "pent1", "--level", "1.x")[0] == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertex_count": 2,')
    assert run(capsys, "bounds", "alpha", str(bad))[0] == EXIT_INPUT


def test_bounds_solver_failure_exit_code(capsys):
    # level 4 on i3322csw exceeds the word-count ceiling
    code, _, err = run(capsys, "bounds", "mtheta", "i3322csw", "--level", "k", "--k", "4")
    assert code == EXIT_SOLVER
    assert "solver failure" in err


def test_bundled_suite_well_formed():
    entries = load_suite("table5")
    assert {e.quantity for e in entries} == {"alpha", "theta", "mtheta"}
    assert all(e.slow for e in entries if e.options.get("level") == "1.x")


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "nosuchsuite")
    assert code == EXIT_INPUT and "unknown suite" in err


def _suite(tmp_path, entries):
    path = tmp_path / "suite.json"
    path.write_text(json.dumps({"suite": "fixture", "entries": entries}))
    return str(path)


def test_verify_passing_fixture(capsys, tmp_path):
    path = _suite(tmp_path, [
        {"instance": "pent1", "quantity": "alpha", "expected": 2, "tolerance": 1e-9},
        {"instance": "chsh", "quantity": "theta", "expected": 3.4142136, "tolerance": 1e-4},
        {"instance": "pent1", "quantity": "mtheta", "options": {"level": "1.x", "x": 2, "trials": 2},
         "band": [2.0, 3.0], "slow": True},
    ])
    code, out, _ = run(capsys, "verify", path, "--skip-slow")
    assert code == EXIT_OK
    assert out.splitlines()[-1] == "all entries passed"
    assert out.count("PASS") == 2 and out.count("SKIP") == 1


def test_verify_wrong_expected_fails(capsys, tmp_path):
    path = _suite(tmp_path, [
        {"instance": "pent1", "quantity": "alpha", "expected": 2, "tolerance": 1e-9},
        {"instance": "pent1", "quantity": "theta", "expected": 2.5, "tolerance": 1e-5},
    ])
    code, out, _ = run(capsys, "verify", path, "--format", "json")
    assert code == EXIT_VERIFY
    doc = json.loads(out)
    assert not doc["passed"]
    assert [e["status"] for e in doc["entries"]] == ["pass", "fail"]
    assert doc["entries"][1]["delta"] == pytest.approx(math.sqrt(5) - 2.5, abs=1e-5)


def test_verify_malformed_suite(capsys, tmp_path):
    path = _suite(tmp_path, [{"instance": "pent1", "quantity": "alpha", "expected": 2, "tolerance": 0}])
    assert run(capsys, "verify", path)[0] == EXIT_INPUT
    path = _suite(tmp_path, [{"instance": "pent1", "quantity": "alpha", "band": [3, 2]}])
    assert run(capsys, "verify", path)[0] == EXIT_INPUT
