import io
import json
import subprocess
import sys

import pytest

from signed_ce.cli import RunConfig, UsageError, main, read_config


def call(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


@pytest.mark.parametrize(
    "K, rows",
    [
        (0, ["2/1,0/1,2,0,+", "3/1,1/1,3,1,"]),
        (1, ["2/1,0/1,2,0,+", "29/12,5/12,2.4166666666666665,0.41666666666666669,-",
             "9/4,7/12,2.25,0.58333333333333337,+", "8/3,1/1,2.6666666666666665,1,"]),
    ],
)
def test_graph_rows(K, rows):
    code, text = call("graph", "-K", str(K))
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "t,x,t_float,x_float,sign"
    assert lines[1:] == rows


def test_graph_stage_two_endpoints():
    _, text = call("graph", "--stages", "2")
    lines = text.splitlines()
    assert len(lines) == 7
    assert lines[-1].startswith("21/8,1/1,")


def test_construct_is_deterministic():
    a = call("construct", "-K", "5")
    b = call("construct", "-K", "5")
    assert a == b and a[0] == 0
    doc = json.loads(a[1])
    assert doc["invariant_violations"] == []
    assert doc["boundary_set"][0] == "0/1"


def test_levels_json():
    code, text = call("levels", "-K", "2")
    rows = json.loads(text)
    assert code == 0
    assert [r["sup_preimage_count"] for r in rows] == [1, 3, 5]
    assert rows[1]["witness_gap"] == ["9/4", "29/12"]
    assert all(r["area"] == "1/1" for r in rows)


def test_levels_csv(tmp_path):
    code, _ = call("levels", "-K", "1", "--format", "csv", "--out", str(tmp_path))
    assert code == 0
    text = (tmp_path / "levels.csv").read_text()
    assert text.splitlines()[0].startswith("stage,sup_preimage_count")


def test_residual_rows_stage_one():
    code, text = call("residual", "-K", "1", "--tol", "1e-10")
    rows = json.loads(text)
    assert code == 0
    canon = [r for r in rows if r["stage"] == 1 and r["test_function"] == "x"][0]
    assert (canon["residual"], canon["defect"], canon["full_residual"]) == ("1/1", "1/1", "0/1")


def test_report_stage_zero_passes(tmp_path):
    code, _ = call("report", "-K", "0", "--out", str(tmp_path))
    assert code == 0
    rows = json.loads((tmp_path / "report.json").read_text())
    assert {r["id"] for r in rows} >= {"STAGE", "AC1", "AC3", "AC8"}
    assert all(r["passed"] for r in rows)


def test_octa_outputs(tmp_path):
    code, _ = call("octa", "-K", "1", "--out", str(tmp_path))
    assert code == 0
    assert {p.name for p in tmp_path.iterdir()} == {"flux_table.csv", "slice_tv.csv", "wireframe.csv"}


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nstages = 1\nformat = csv\nsuite = levels, octa\n")
    assert read_config(str(cfg)) == {"stages": 1, "format": "csv", "suite": ("levels", "octa")}
    code, text = call("graph", "--config", str(cfg))
    assert code == 0 and len(text.splitlines()) == 5
    code, text = call("graph", "--config", str(cfg), "-K", "0")
    assert code == 0 and len(text.splitlines()) == 3


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert call("graph", "--config", str(cfg))[0] == 2
    assert call("graph", "--config", str(tmp_path / "missing.cfg"))[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["graph", "--stages", "-1"],
        ["nonsense"],
        ["levels", "--format", "xml"],
        ["report", "--suite", "flux"],
        ["graph", "-K", "5000"],
        [],
    ],
)
def test_usage_errors_exit_two(argv):
    assert call(*argv)[0] == 2


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(tol=0)
    assert RunConfig().suite == ("construct", "levels", "residual", "flow", "octa")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "signed_ce", "graph", "-K", "0"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "2/1,0/1,2,0,+"
    res = subprocess.run([sys.executable, "-m", "signed_ce", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "signed-ce" in res.stdout
