import json
import subprocess
import sys
from fractions import Fraction

import pytest

from conftest import CLI_CASES, INPUTS, cli_argv
from kstabmaps import cli


def _run(argv):
    code, report = cli.run(argv)
    return code, json.loads(cli.render(report))


@pytest.mark.parametrize("template,expected", CLI_CASES, ids=[" ".join(c[0][:2]) for c in CLI_CASES])
def test_exit_codes(template, expected):
    code, report = _run(cli_argv(template))
    assert code == expected
    assert report["schema_version"] == cli.SCHEMA_VERSION
    assert report["status"] == cli.STATUS[code]
    assert report["manifest"]["seed"] is not None
    assert (report["error"] is None) == (code == 0)


def test_df_toric_p1():
    code, rep = _run(["df", "toric", str(INPUTS / "p1_dnc.json")])
    res = rep["result"]
    assert code == 0 and res["df"] == "1/4"
    assert Fraction(res["minimum_norm"]) > 0
    assert res["provenance"]["route_agreement"] == "true"


def test_log_df_report():
    _, rep = _run(["df", "toric", str(INPUTS / "p1_dnc_log.json")])
    assert rep["result"]["log_df"] == {"route": "coefficients(divisor as twist)", "value": "3/8"}


def test_kodaira_embed_p2():
    _, rep = _run(["kodaira", "embed", str(INPUTS / "p2.json")])
    assert (rep["result"]["k_min"], rep["result"]["epsilon"]) == (6, "1/6")


def test_kodaira_family_p2():
    _, rep = _run(["kodaira", "family", str(INPUTS / "chern_p2.json"), "--very-ample-floor", "1", "--cap", "20"])
    assert rep["result"]["m_min"] == 9


def test_verify_identities_lists_each_n():
    code, rep = _run(["verify", "identities", "--n-max", "6"])
    assert code == 0
    assert [c["n"] for c in rep["result"]["cases"]] == list(range(1, 7))
    assert all(c["passed"] for c in rep["result"]["cases"])


def test_missing_entry_is_reported():
    code, rep = _run(["df", "table", str(INPUTS / "missing_entry.json")])
    assert code == 2
    assert rep["error"]["type"] == "MissingEntry" and rep["error"]["monomial"] == ["K", "Lc"]


def test_verification_failure_exit_code(tmp_path):
    bad = json.loads((INPUTS / "jtest.json").read_text())
    bad["df"] = "100"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, rep = _run(["jtest", str(path)])
    assert code == 1 and rep["status"] == cli.STATUS[1]
    assert rep["result"] is not None


def test_missing_file_is_an_input_error(tmp_path):
    code, rep = _run(["ehrhart", str(tmp_path / "nope.json")])
    assert code == 2 and rep["error"]["type"] == "FileNotFoundError"


def test_malformed_input_is_an_input_error(tmp_path):
    path = tmp_path / "tc.json"
    path.write_text(json.dumps({"pl_function": {"pieces": []}}))
    code, rep = _run(["df", "toric", str(path)])
    assert code == 2


def test_report_written_to_out(tmp_path):
    out = tmp_path / "report.json"
    code = cli.main(["ehrhart", str(INPUTS / "square.json"), "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["ehrhart"]["coefficients"] == ["1", "2", "1"]
    assert rep["manifest"]["output"] == str(out)


@pytest.mark.parametrize("template,expected", CLI_CASES, ids=[" ".join(c[0][:2]) for c in CLI_CASES])
def test_reruns_are_byte_identical(tmp_path, template, expected):
    out = tmp_path / "report.json"
    argv = cli_argv(template) + ["--out", str(out)]
    assert cli.main(argv) == expected
    first = out.read_bytes()
    out.unlink()
    assert cli.main(argv) == expected
    assert out.read_bytes() == first


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kstabmaps.cli", "verify", "identities", "--n-max", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["passed"] is True
