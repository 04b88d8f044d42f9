import subprocess
import sys
from fractions import Fraction

import pytest

from ppacert import cli, worst_case
from ppacert.pep_builder import read_sdpa


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_bound_n1(capsys):
    assert run(capsys, "bound", "1") == (0, "1/4 = 0.25\n")


def test_bound_n3(capsys):
    assert run(capsys, "bound", "3") == (0, "27/256 = 0.10546875\n")


def test_certify_pass(capsys):
    code, out = run(capsys, "certify", "4")
    assert code == 0
    assert out == "PASS N=4 eta=256/3125 = 0.08192\n"


def test_certify_fail(capsys, monkeypatch):
    def broken(n):
        raise worst_case.CertificationError("dual", "pivot mismatch")

    monkeypatch.setattr(cli, "certify_optimal_rate", broken)
    code, out = run(capsys, "certify", "4")
    assert code == 1
    assert out.startswith("FAIL N=4 stage=dual")


@pytest.mark.parametrize("argv", [[], ["bound"], ["bound", "0"], ["bound", "x"], ["simulate", "--N", "3"], ["frobnicate"]])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_rate_table(capsys, tmp_path):
    code, out = run(capsys, "rate-table", "3")
    assert code == 0
    assert out.splitlines() == [
        "N,zeta,known_bound,ratio",
        "1,0.25,0.5,0.5",
        "2,0.14814814814814815,0.33333333333333333,0.44444444444444444",
        "3,0.10546875,0.25,0.421875",
    ]
    path = tmp_path / "t.csv"
    assert run(capsys, "rate-table", "3", "-o", str(path), "--jobs", "2") == (0, "")
    assert path.read_text() == out


def test_rate_table_row_100(tmp_path, capsys):
    path = tmp_path / "t.csv"
    run(capsys, "rate-table", "100", "--jobs", "4", "-o", str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == 101
    assert lines[-1] == "100,0.003660507052763557,0.009900990099009901,0.36971121232911926"


def test_example_csv(capsys):
    code, out = run(capsys, "example", "5", "--scale", "10")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "k,x,y" and len(lines) == 8
    k, x, y = lines[2].split(",")
    assert k == "1"
    assert float(x) == pytest.approx(8.333333, abs=1e-6)
    assert float(y) == pytest.approx(3.726780, abs=1e-6)


def test_sdp_export(tmp_path, capsys):
    path = tmp_path / "pep.dat-s"
    assert run(capsys, "sdp-export", "2", "-o", str(path)) == (0, "")
    prob = read_sdpa(path)
    assert prob.block_sizes == (4, -(3 + 3 + 2))


def test_sdp_export_unwritable(tmp_path, capsys):
    code = cli.main(["sdp-export", "2", "-o", str(tmp_path / "no" / "such" / "file")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_simulate_rotation(capsys):
    code, out = run(capsys, "simulate", "--rotation", "--N", "5")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "k,residual_norm" and len(lines) == 8
    name, value = lines[-1].split(",")
    assert name == "performance_ratio"
    assert float(value) == pytest.approx(float(Fraction(5**5, 6**6)), abs=1e-12)


def test_simulate_matrix(capsys):
    code, out = run(capsys, "simulate", "--matrix", "1,0;0,1", "--N", "2", "--w0", "4,0")
    assert code == 0
    # halving each step: residuals 2, 1, 0.5 and ratio (0.5/4)^2
    assert out.splitlines() == ["k,residual_norm", "0,2", "1,1", "2,0.5", "performance_ratio,0.015625"]


def test_simulate_rejects_non_monotone(capsys):
    code = cli.main(["simulate", "--matrix=-1,0;0,1", "--N", "2"])
    assert code == 2
    assert "not monotone" in capsys.readouterr().err


def test_simulate_w0_dimension(capsys):
    assert cli.main(["simulate", "--rotation", "--N", "2", "--w0", "1,2,3"]) == 2


def test_module_entry_deterministic():
    cmd = [sys.executable, "-m", "ppacert", "simulate", "--rotation", "--N", "7", "--lambda", "1"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True)
    b = subprocess.run(cmd, capture_output=True, text=True, check=True)
    assert a.stdout == b.stdout and a.stdout


def test_module_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "ppacert", "bound", "2"], capture_output=True, text=True)
    bad = subprocess.run([sys.executable, "-m", "ppacert", "bound", "-3"], capture_output=True, text=True)
    assert (ok.returncode, ok.stdout) == (0, "4/27 = 0.14814814814814815\n")
    assert bad.returncode == 2
