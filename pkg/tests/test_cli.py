import subprocess
import sys

import pytest

from wftsched.cli import main


@pytest.fixture
def two(tmp_path):
    p = tmp_path / "two.inst"
    p.write_text("job 1 0 4 1\njob 2 0 1 4\n")
    return p


def test_generate_writes_jobs_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.inst", tmp_path / "b.inst"
    assert main(["generate", "--n", "5", "--seed", "1", "-o", str(a)]) == 0
    assert main(["generate", "--n", "5", "--seed", "1", "-o", str(b)]) == 0
    text = a.read_text()
    assert sum(1 for line in text.splitlines() if line.startswith("job ")) == 5
    assert text == b.read_text()
    out = capsys.readouterr().out
    assert "# seed 1" in out and "P = " in out and "D = " in out


def test_generate_rejects_zero_jobs(tmp_path):
    assert main(["generate", "--n", "0", "--seed", "1", "-o", str(tmp_path / "x")]) == 2


def test_generate_honours_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("WFTSCHED_OUTPUT_DIR", str(tmp_path))
    assert main(["generate", "--n", "3", "--seed", "9"]) == 0
    assert (tmp_path / "instance-n3-seed9.inst").exists()


def test_generate_unwritable_path_is_io_error(tmp_path):
    assert main(["generate", "--n", "3", "--seed", "9", "-o", str(tmp_path / "no" / "such" / "f")]) == 3


def test_run_two_job_example(two, tmp_path, capsys):
    seg, wts = tmp_path / "s.csv", tmp_path / "w.csv"
    assert main(["run", "--algo", "p", "--mode", "exact", "--input", str(two), "--trace", str(seg), "--weights", str(wts)]) == 0
    assert "cost = 9" in capsys.readouterr().out
    assert seg.read_text().splitlines()[0] == "start,end,job_index,bin_family,bin_index"
    assert wts.read_text().splitlines()[:2] == ["time,W_alg", "0,5"]


def test_run_dens_exact_is_usage_error(two, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("WFTSCHED_OUTPUT_DIR", str(tmp_path))
    assert main(["run", "--algo", "d", "--mode", "exact", "--input", str(two)]) == 2
    assert "quantum" in capsys.readouterr().err


def test_run_combined_quantum_prints_bins(two, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("WFTSCHED_OUTPUT_DIR", str(tmp_path))
    assert main(["run", "--algo", "min", "--mode", "quantum", "--delta", "1/8", "--input", str(two)]) == 0
    assert "opened bins = " in capsys.readouterr().out


def test_run_missing_file_is_io_error(tmp_path):
    assert main(["run", "--input", str(tmp_path / "missing.inst")]) == 3


def test_run_malformed_file_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.inst"
    bad.write_text("job 1 0 0 1\n")
    assert main(["run", "--input", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_compare_two_job_example(two, capsys):
    assert main(["compare", "--algo", "p", "--input", str(two)]) == 0
    out = capsys.readouterr().out
    assert "ratio ALG/OPT       = 1 " in out
    assert "OPT cost (original) = 9 " in out


def test_compare_refuses_large_instance(tmp_path, capsys):
    p = tmp_path / "seven.inst"
    p.write_text("".join(f"job {i} 0 1 1\n" for i in range(1, 8)))
    assert main(["compare", "--input", str(p)]) == 2
    assert "limited to 6" in capsys.readouterr().err


def test_verify_pass_and_negative_control(tmp_path, capsys):
    csv_path = tmp_path / "r.csv"
    assert main(["verify", "--suite", "goodness", "--algo", "p", "--instances", "10", "--seed", "2", "--csv", str(csv_path)]) == 0
    assert csv_path.read_text().startswith("check,instances,violations,max_ratio")
    assert main(["verify", "--suite", "goodness", "--algo", "p", "--c", "1", "--instances", "30"]) == 1
    assert "violation:" in capsys.readouterr().out


def test_verify_unknown_suite():
    assert main(["verify", "--suite", "nope"]) == 2


def test_bad_flag_is_usage_error():
    assert main(["run", "--algo", "zzz", "--input", "x"]) == 2


def test_module_entry_point(two):
    out = subprocess.run([sys.executable, "-m", "wftsched", "run", "--input", str(two),
                          "--trace", str(two.with_suffix(".s")), "--weights", str(two.with_suffix(".w"))],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "cost = 9" in out.stdout
