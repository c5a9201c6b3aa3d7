import csv
import io
import json
import subprocess
import sys

import pytest

from latticephase.cli import EXIT_AUDIT, EXIT_OK, EXIT_USAGE, RunConfig, UsageError, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_eval():
    code, out = call("eval", "--spec", "theta", "--alpha", "1", "--z", "0,1")
    assert code == EXIT_OK
    value, tail = out.split()
    assert float(value) == pytest.approx(1.180340599, abs=1e-9)
    assert tail.startswith("tail_bound=")


def test_eval_methods_agree():
    a = call("eval", "--spec", "m", "--alpha", "1.3", "--z", "0.2,1.4", "--method", "direct")[1].split()[0]
    b = call("eval", "--spec", "m", "--alpha", "1.3", "--z", "0.2,1.4", "--method", "reduced")[1].split()[0]
    assert a == b


def test_reduce():
    assert call("reduce", "--z", "5.5,2")[1] == "0.5,2  T(-5)\n"
    assert call("reduce", "--z", "0,1")[1] == "0,1\n"


def test_minimize():
    code, out = call("minimize", "--spec", "m", "--alpha", "2.0")
    assert code == 0 and out.startswith("Hexagonal 0.5,0.8660254038 ")
    code, out = call("minimize", "--spec", "m", "--alpha", "0.5")
    assert out.startswith("Rectangular 0,3.2555")


def test_thresholds():
    code, out = call("thresholds")
    line1, line2 = out.splitlines()
    vals = dict(kv.split("=") for kv in line1.split())
    assert float(vals["alpha_b"]) == pytest.approx(0.9203340927, abs=1e-9)
    assert line2.startswith("residual_1=")


def test_phase_diagram_csv_roundtrip():
    code, out = call("phase-diagram", "--spec", "m", "--alpha-from", "0.6", "--alpha-to", "1.2", "--steps", "4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alpha,label,x,y,energy"
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    r = rows[0]
    _, ev = call("eval", "--spec", "m", "--alpha", r["alpha"], "--z", f"{r['x']},{r['y']}")
    # the printed point is rounded to 10 digits; the energy is stationary there
    assert float(ev.split()[0]) == pytest.approx(float(r["energy"]), rel=1e-9)


def test_phase_diagram_json_and_output_file(tmp_path):
    dest = tmp_path / "pd.json"
    code, out = call("--format", "json", "-o", str(dest), "phase-diagram", "--spec", "theta",
                     "--alpha-from", "1", "--alpha-to", "1", "--steps", "1")
    assert code == 0 and out == ""
    data = json.loads(dest.read_text())
    assert data[0]["label"] == "Hexagonal"


def test_identical_invocations_are_bit_identical():
    argv = ("phase-diagram", "--spec", "m", "--alpha-from", "0.85", "--alpha-to", "1.0", "--steps", "3")
    assert call(*argv)[1] == call(*argv)[1]


def test_curve_yalpha():
    code, out = call("curve-yalpha", "--alpha-from", "0.6", "--alpha-to", "0.8", "--steps", "3")
    assert code == 0
    ys = [float(l.split(",")[1]) for l in out.splitlines()[1:]]
    assert ys == sorted(ys, reverse=True)


def test_audit_exit_codes():
    code, out = call("audit", "--lemma", "eps1_bound")
    assert code == EXIT_OK and out.startswith("eps1_bound: PASS")
    code, out = call("audit", "--lemma", "PA_PB", "--alpha-range", "0.9156,0.92,2", "--x-range", "0,0.5,3",
                     "--y-range", "1.9,2,2")
    assert code == EXIT_AUDIT and "FAIL" in out


@pytest.mark.parametrize("argv", [
    ("eval", "--spec", "w7", "--alpha", "1", "--z", "0,1"),
    ("eval", "--spec", "m", "--alpha", "-1", "--z", "0,1"),
    ("eval", "--spec", "m", "--alpha", "1", "--z", "0,-1"),
    ("--tol", "0", "reduce", "--z", "0,1"),
    ("audit", "--lemma", "L_positive", "--alpha-range", "1.05,1.2,3"),
    ("audit", "--all", "--alpha-range", "1,2,3"),
    ("thresholds", "--gamma", "-1"),
    (),
])
def test_usage_errors(argv):
    assert call(*argv)[0] == EXIT_USAGE


def test_run_config():
    with pytest.raises(UsageError):
        RunConfig(digits=30)
    assert RunConfig(digits=4).fmt(3.14159) == "3.142"


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "latticephase.cli", "reduce", "--z", "5.5,2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "0.5,2  T(-5)\n"
