import csv
import io
import json
import subprocess
import sys

import pytest

from cbrsp.cli import main


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate(capsys):
    code, out, _ = call(capsys, "enumerate-channels")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "count=144" and len(lines) == 145
    code, out, _ = call(capsys, "enumerate-channels", "--family", "high", "--charlie", "pm")
    assert out.splitlines()[0] == "count=144" and out.splitlines()[1].endswith(";pm")


def test_run_forced(capsys):
    code, out, _ = call(capsys, "run", "prob", "--channel", "cao-an", "--t1", "0.785398,0",
                        "--t2", "0.785398,0", "--force", "q2,q2,a")
    doc = json.loads(out)
    assert code == 0
    assert doc["success"] == {"A->B": True, "B->A": True}
    assert doc["fidelity"] == {"A->B": 1.0, "B->A": 1.0}


def test_run_all_and_seeded(capsys):
    code, out, _ = call(capsys, "run", "det", "--channel", "noise-study", "--t1", "0.3,1",
                        "--t2", "1.2,4", "--all")
    assert code == 0 and len(json.loads(out)) == 32
    _, a, _ = call(capsys, "run", "cj", "--channel", "noise-study", "--ancillas", "0,1",
                   "--t1", "0.3,1", "--t2", "1.2,4", "--seed", "9")
    _, b, _ = call(capsys, "run", "cj", "--channel", "noise-study", "--ancillas", "0,1",
                   "--t1", "0.3,1", "--t2", "1.2,4", "--seed", "9")
    assert a == b
    assert json.loads(a)["channel"].startswith("ghz")


def test_run_seven_qubit_spec(capsys):
    code, out, _ = call(capsys, "run", "cj", "--channel", "ghz0+,ghz1+,ghz0-,ghz1-;+;comp",
                        "--t1", "0.3,1", "--t2", "1.2,4", "--force", "u1,v0,u0,v1,b")
    doc = json.loads(out)
    assert code == 0 and all(f == 1.0 for f in doc["fidelity"].values())


@pytest.mark.parametrize("argv", [
    ["run", "prob", "--t1", "0.3", "--t2", "0.2,0"],
    ["run", "prob", "--t1", "2.0,0", "--t2", "0.2,0"],
    ["run", "prob", "--t1", "0.3,0", "--t2", "0.2,0", "--force", "q2,q2"],
    ["run", "prob", "--t1", "0.3,0", "--t2", "0.2,0", "--force", "u0,q2,a"],
    ["run", "prob", "--t1", "0.3,0", "--t2", "0.2,0", "--all", "--seed", "1"],
    ["run", "prob", "--channel", "psi+,psi+,psi+,phi-;+;comp", "--t1", "0.3,0", "--t2", "0.2,0"],
    ["run", "det", "--channel", "ghz0+,ghz1+,ghz0-,ghz1-;+;comp", "--t1", "0.3,0", "--t2", "0.2,0"],
    ["run", "cj", "--t1", "0.3,0", "--t2", "0.2,0", "--ancillas", "2,0"],
    ["sweep", "--eta", "0:2:0.5"],
    ["sweep", "--eta", "1:0:0.1"],
    ["sweep", "--noise", "dep"],
    ["verify", "--suite", "nope"],
    ["frobnicate"],
    ["run", "prob", "--t1", "0.3,0", "--t2", "0.2,0", "--bogus"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 1


def test_sweep_csv(capsys, tmp_path):
    target = tmp_path / "pd.csv"
    code, out, _ = call(capsys, "sweep", "--noise", "pd", "--theta1", "0.785398", "--theta2", "0.785398",
                        "--eta", "0:1:0.05", "--out", str(target))
    assert code == 0 and out == ""
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    assert len(rows) == 21
    assert float(rows[0]["F_sim"]) == 1.0
    assert float(rows[-1]["eta"]) == 1.0
    assert abs(float(rows[10]["F_closed"]) - 0.0859375) < 1e-5


def test_sweep_json(capsys):
    code, out, _ = call(capsys, "sweep", "--noise", "ad", "--eta", "0,0.5", "--phi1", "0,1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc) == 4
    assert abs(doc[2]["F_sim"] - 0.75) < 1e-12


def test_sweep_is_byte_stable(capsys):
    _, a, _ = call(capsys, "sweep", "--eta", "0:1:0.25", "--theta1", "0.3,0.9")
    _, b, _ = call(capsys, "sweep", "--eta", "0:1:0.25", "--theta1", "0.3,0.9")
    assert a == b


def test_verify_suites(capsys):
    code, out, _ = call(capsys, "verify", "--suite", "cptp")
    assert code == 0 and out.splitlines()[-1] == "suite=cptp checks=2 failed=0"
    code, out, _ = call(capsys, "verify", "--suite", "enumeration")
    assert code == 0 and out.startswith("PASS [1]")


def test_verify_closedform_reports_mismatch(capsys):
    # the phase-damping closed form disagrees with the simulation, so this suite exits 2
    code, out, _ = call(capsys, "verify", "--suite", "closedform")
    assert code == 2
    assert "FAIL [4a]" in out and "pd: verdict=MISMATCH" in out and "ad: verdict=MATCH" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cbrsp", "enumerate-channels", "--family", "low"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("count=144\n")
