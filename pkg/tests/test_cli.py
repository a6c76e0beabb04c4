import csv
import json
import subprocess
import sys

import pytest

from conecrit.cli import dumps, main, parse_range

PHASE = ["phase", "--N", "3", "--domain", "orthant:1", "--s-range", "-1:3:0.5",
         "--p-range", "-3:3:0.5"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exponents_half_space(capsys):
    code, out, _ = run(capsys, "exponents", "--N", "3", "--domain", "orthant:1", "--s", "0")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema"] == 1
    assert doc["p_star_sub"] == -1 and doc["p_star_super"] == 2
    assert list(doc)[:4] == ["schema", "N", "domain", "s"]


def test_exponents_minus_infinity(capsys):
    _, out, _ = run(capsys, "exponents", "--N", "3", "--domain", "explicit:0", "--s", "0")
    assert json.loads(out)["p_star_sub"] == "-inf"
    assert '"p_star_sub": "-inf"' in out


def test_exponents_cap_consistent_with_half_space(capsys):
    _, out, _ = run(capsys, "exponents", "--N", "4", "--domain", "cap:1.5707963267948966",
                    "--s", "1", "--resolution", "4096")
    doc = json.loads(out)
    assert doc["lambda1"] == pytest.approx(3.0, abs=1e-6)
    assert doc["p_star_sub"] == pytest.approx(1 - 1 / doc["alpha_plus"], abs=1e-15)


def test_exponents_with_class_and_kelvin(capsys):
    _, out, _ = run(capsys, "exponents", "--N", "3", "--lambda1", "2", "--s", "0", "--p", "-1",
                    "--c", "1")
    doc = json.loads(out)
    assert doc["class"] == "critical"
    assert doc["sigma_kelvin"] == 6 and doc["p_star_sub_kelvin"] == -1


def test_floats_have_17_digits():
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert dumps([float("inf"), float("-inf"), None, True]) == '["inf", "-inf", null, true]'


def test_phase_csv(tmp_path, capsys):
    out = tmp_path / "phase.csv"
    assert main(PHASE + ["--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(raw.decode().splitlines()))
    assert len(rows) == 9 * 13
    assert list(rows[0]) == ["s", "p", "class"]
    # row-major: s outer, p inner
    assert [r["p"] for r in rows[:3]] == ["-3", "-2.5", "-2"]
    assert all(r["s"] == "-1" for r in rows[:13])
    s0 = {r["p"]: r["class"] for r in rows if r["s"] == "0"}
    assert (s0["-1.5"], s0["-1"], s0["-0.5"]) == ("exists", "critical", "not_exists")
    assert (s0["1.5"], s0["2"], s0["2.5"]) == ("not_exists", "critical", "exists")
    assert all(r["class"] == "exists" for r in rows if r["s"] == "3")
    meta = json.loads((tmp_path / "phase.csv.meta.json").read_text())
    assert meta["command"] == "phase" and meta["schema"] == 1


def test_phase_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(PHASE + ["--out", str(a)])
    main(PHASE + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_parse_range():
    assert parse_range("0:1:0.1")[-1] == 1.0
    assert parse_range("0:1:0.1")[3] == 0.3
    assert parse_range("-0.5:0.5:0.5") == [-0.5, 0.0, 0.5]
    assert parse_range("2:2:1") == [2.0]


@pytest.mark.parametrize("bad", ["3:1:0.5", "0:1:0", "0:1", "a:b:c", "0:1:-1"])
def test_bad_ranges_are_usage_errors(bad, capsys):
    code, _, err = run(capsys, "phase", "--N", "3", "--domain", "orthant:1", "--s-range", bad,
                       "--p-range", "0:1:0.5")
    assert code == 1 and "error" in err


def test_usage_errors(capsys):
    assert run(capsys, "exponents", "--N", "3")[0] == 1
    assert run(capsys, "exponents", "--N", "3", "--domain", "cap:9", "--s", "0")[0] == 1
    assert run(capsys, "exponents", "--N", "3", "--domain", "orthant:1", "--lambda1", "2",
               "--s", "0")[0] == 1
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["exponents", "--N", "three"])
    assert info.value.code == 1


def test_shoot(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, text, _ = run(capsys, "shoot", "--N", "3", "--lambda1", "2", "--s", "0", "--p", "0",
                        "--c", "1", "--K", "64", "--rmax", "100", "--out", str(out))
    doc = json.loads(text)
    assert code == 0
    assert doc["exit_kind"] == "blow_down"
    assert doc["R"] == pytest.approx(86.666535066, rel=1e-9)
    lines = out.read_text().splitlines()
    assert lines[0] == "log_r,w,w_x" and len(lines) == doc["samples"] + 1


def test_shoot_without_exit(capsys):
    code, text, _ = run(capsys, "shoot", "--N", "3", "--lambda1", "2", "--s", "0", "--p", "0",
                        "--c", "1", "--K", "64", "--rmax", "50")
    doc = json.loads(text)
    assert code == 0 and doc["exit_kind"] == "reached_rmax" and doc["R"] == "inf"


def test_certify(capsys):
    code, text, _ = run(capsys, "certify", "--N", "3", "--domain", "orthant:1", "--s", "0",
                        "--p", "0", "--c", "1", "--compact", "2:4", "--M", "100",
                        "--resolution", "257")
    doc = json.loads(text)
    assert code == 0 and doc["verified"] is True and doc["min_on_compact"] >= 100


def test_certify_regime_gate(capsys):
    code, _, err = run(capsys, "certify", "--N", "3", "--domain", "orthant:1", "--s", "0",
                       "--p", "-2", "--c", "1", "--compact", "2:4", "--M", "100")
    assert code == 2
    assert "p_star_sub" in err and "<" in err


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(capsys, "psi", "--N", "3", "--domain", "orthant:1", "--s", "1.5", "--p", "0",
                       "--tol", "1e-20")
    assert code == 3 and "numerical failure" in err


def test_psi_and_eigen(capsys):
    code, text, _ = run(capsys, "psi", "--N", "3", "--domain", "orthant:1", "--s", "0", "--p", "-2")
    doc = json.loads(text)
    assert code == 0 and doc["residual_max"] <= 1e-8 and doc["psi_min"] == 1
    code, text, _ = run(capsys, "eigen", "--N", "2", "--domain", "arc:3.141592653589793")
    assert json.loads(text)["lambda1"] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "conecrit", "exponents", "--N", "3", "--domain",
                           "orthant:1", "--s", "0"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["p_star_super"] == 2
