import io
import json
import subprocess
import sys

import pytest

from tau2sov.cli import EXIT_FAIL, EXIT_GENERICITY, EXIT_OK, EXIT_USAGE, main
from tau2sov.report import strip_timing


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def full_reports(tmp_path_factory):
    d = tmp_path_factory.mktemp("reports")
    paths = [d / "a.json", d / "b.json"]
    codes = [run(["verify", "all", "--p", "3", "--N", "2", "--seed", "1", "--out", str(p), "--quiet"])[0]
             for p in paths]
    return codes, [json.loads(p.read_text()) for p in paths]


def test_verify_all_passes_and_is_deterministic(full_reports):
    codes, (a, b) = full_reports
    assert codes == [EXIT_OK, EXIT_OK]
    assert len(a["checks"]) >= 40 and a["summary"]["fail"] == 0
    assert strip_timing(a) == strip_timing(b)
    ids = [c["id"] for c in a["checks"]]
    assert len(set(ids)) == len(ids)
    assert {i.split("/")[0] for i in ids} == {"bulk", "boundary", "sov", "spectrum", "tq", "reductions"}


def test_report_meta(full_reports):
    _, (a, _) = full_reports
    m = a["meta"]
    assert (m["p"], m["p_prime"], m["N"], m["seed"]) == (3, 2, 2, 1)
    assert m["schema_version"] == 1 and "wall_time_ms" in m and "version" in m


def test_failing_check_gives_exit_one(tmp_path):
    # single-site seed 1: a perturbed eigenvalue violates the determinant conditions by < 1e-3
    path = tmp_path / "s.json"
    code, text = run(["verify", "spectrum", "--N", "1", "--seed", "1", "--out", str(path)])
    assert code == EXIT_FAIL
    rec = {c["id"]: c for c in json.loads(path.read_text())["checks"]}
    assert rec["spectrum/FrbtD-matrix:perturbation-margin"]["pass"] is False
    assert rec["spectrum/FrbtD-matrix:det"]["pass"] is True
    assert "FAIL spectrum/FrbtD-matrix:perturbation-margin" in text


@pytest.mark.parametrize("argv", [
    ["verify", "tq", "--p", "4"],
    ["verify", "tq", "--mode", "sov"],
    ["verify", "bulk", "--N", "6"],
    ["verify", "nonsense"],
    ["verify", "bulk", "--pprime", "3"],
    [],
])
def test_usage_errors(argv, tmp_path):
    assert run(argv + (["--out", str(tmp_path / "x.json")] if argv[:1] == ["verify"] else []))[0] == EXIT_USAGE


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 3,\n "N": }')
    err = io.StringIO()
    old, sys.stderr = sys.stderr, err
    try:
        code = main(["verify", "bulk", "--config", str(bad), "--out", str(tmp_path / "r.json")], io.StringIO())
    finally:
        sys.stderr = old
    assert code == EXIT_USAGE and "line 2" in err.getvalue()


def test_config_command_and_genericity_exit(tmp_path):
    path = tmp_path / "c.json"
    assert run(["config", "--mode", "sov", "--N", "2", "--out", str(path)])[0] == EXIT_OK
    data = json.loads(path.read_text())
    assert run(["verify", "sov", "--config", str(path), "--out", str(tmp_path / "r.json"), "--quiet"])[0] == EXIT_OK
    data["sites"][1] = data["sites"][0]         # coinciding inhomogeneities
    path.write_text(json.dumps(data))
    assert run(["verify", "sov", "--config", str(path), "--out", str(tmp_path / "r.json")])[0] == EXIT_GENERICITY


def test_spectrum_command():
    code, text = run(["spectrum", "--p", "3", "--N", "1", "--seed", "5"])
    assert code == EXIT_OK
    assert "3 eigenvalues (simple spectrum)" in text


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "tau2sov.cli", "verify", "bulk", "--N", "1",
                          "--out", str(tmp_path / "b.json"), "--quiet"], capture_output=True, text=True)
    assert res.returncode == EXIT_OK and "0 failed" in res.stdout
