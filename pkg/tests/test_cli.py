from __future__ import annotations

import json

import pytest

from memaccel.cli import main


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _report(workdir, name):
    return json.loads((workdir / "reports" / f"{name}.json").read_text())


def test_report_modeled_costs(workdir, capsys):
    assert main(["report", "--w-ref", "7.71", "--w-ma", "0.74"]) == 0
    rep = _report(workdir, "report")
    assert rep["a"]["display"] == "10.4"
    assert abs(rep["a"]["value"] - 10.42) <= 0.01
    assert "a = 10.4" in capsys.readouterr().out


def test_report_with_graph(workdir):
    assert main(["report", "--w-ref", "7.71", "--w-ma", "0.74", "--w-r", "0.5", "--graph", _dvbt_file(workdir)]) == 0
    rep = _report(workdir, "report")
    assert rep["a"]["display"] == "6.62"
    assert rep["plan"]["tables"]


def _dvbt_file(workdir):
    from memaccel.model import dump_graph_spec
    from memaccel.profiles import dvbt_profile

    path = workdir / "dvbt.json"
    dump_graph_spec(dvbt_profile(), path)
    return str(path)


def test_plan_builtin_and_file_agree(workdir):
    assert main(["plan"]) == 0
    builtin = _report(workdir, "plan")["plan"]
    assert main(["plan", "--graph", _dvbt_file(workdir)]) == 0
    assert _report(workdir, "plan")["plan"] == builtin
    assert builtin["tables"][0]["members"] == ["vit.bsum", "vit.cs", "vit.dist"]


def test_plan_budget_override(workdir):
    assert main(["plan", "--budget", "0"]) == 0
    assert _report(workdir, "plan")["plan"]["a"]["exact"] == "1"


def test_missing_graph_gives_failure_record(workdir, capsys):
    assert main(["plan", "--graph", "missing.json"]) != 0
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["status"] == "fail" and record["command"] == "plan"


def test_build_tables_budget_failure(workdir, capsys):
    assert main(["build-tables", "--budget", "1000"]) != 0
    record = json.loads(capsys.readouterr().err.strip())
    assert "BudgetExceeded" in record["failures"][0]


def test_build_verify_bench(workdir):
    assert main(["build-tables"]) == 0
    built = _report(workdir, "build-tables")
    assert built["tables"]["acs"]["M_m"] == 16_777_216
    assert main(["verify", "--bits", "3000"]) == 0
    ver = _report(workdir, "verify")
    assert ver["status"] == "pass"
    assert ver["table_digests"]["acs"] == built["tables"]["acs"]["digest"]
    assert [r["p"] for r in ver["differential"]] == [0.0, 0.01, 0.05, 0.1]
    assert all(r["identical"] for r in ver["differential"])
    assert main(["bench", "--bits", "800", "--reps", "2"]) == 0
    first = _report(workdir, "bench")
    assert main(["bench", "--bits", "800", "--reps", "2"]) == 0
    second = _report(workdir, "bench")
    assert first["bench"]["decoded_digest"] == second["bench"]["decoded_digest"]
    assert first["bench"]["acs_lookups_per_step"] == 16
    assert first["bench"]["minselect_lookups_per_step"] == 21
    assert first["config"]["seed"] == 2010


def test_verify_detects_corrupt_table(workdir, capsys):
    from memaccel.tables import HEADER

    assert main(["build-tables"]) == 0
    path = workdir / "tables" / "minsel.matb"
    data = bytearray(path.read_bytes())
    data[HEADER.size + 5] ^= 0x01
    path.write_bytes(bytes(data))
    assert main(["verify", "--bits", "500"]) == 1
    record = json.loads(capsys.readouterr().err.strip())
    assert any("min-select" in f for f in record["failures"])
    assert _report(workdir, "verify")["status"] == "fail"


def test_nco_bench(workdir):
    assert main(["nco-bench", "--reps", "2"]) == 0
    rep = _report(workdir, "nco-bench")
    assert rep["max_component_error"] <= 1e-3 and rep["config"]["offsets"] == 64
