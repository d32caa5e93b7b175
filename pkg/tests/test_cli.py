import json
import subprocess
import sys

import pytest

from moore_rs.cli import main

COMMANDS = ["sample", "sweep", "compare", "mse", "lmhs", "partition-dump"]

# small but complete runs of every command
RUNS = {
    "sample": ["sample", "--target", "g2", "--size", "50", "--n", "200", "--seed", "3"],
    "sweep": ["sweep", "--target", "g5", "--sizes", "1,10,50", "--max-accepts", "300",
              "--max-trials", "3000", "--seed", "4"],
    "compare": ["compare", "--target", "levy", "--sizes", "5,20", "--max-accepts", "50",
                "--max-trials", "2000"],
    "mse": ["mse", "--target", "needle", "--param", "sigma2=0.1", "--sizes", "40",
            "--n-mrs", "10", "--reps", "5"],
    "lmhs": ["lmhs", "--target", "needle", "--param", "sigma2=0.006", "--max-burn-in", "500",
             "--check-every", "50", "--replicates", "2"],
    "partition-dump": ["partition-dump", "--target", "witch", "--refine-budget", "30"],
}


def _rows(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


def test_sample_g5_writes_accepted_rows(tmp_path):
    out = tmp_path / "s.csv"
    code = main(["sample", "--target", "g5", "--scheme", "integral", "--size", "1000",
                 "--n", "10000", "--seed", "42", "--out", str(out)])
    assert code == 0
    rows = _rows(out)
    assert rows[0] == "x1,weight,mrs,imhs" and len(rows) == 10_001
    assert all(r.endswith(",1,1") for r in rows[1:])
    header = out.read_text().splitlines()
    assert "# seed=42" in header and '# effective_domain="[-100.0,100.0]"' in header


def test_sample_formula_run(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["sample", "--formula", "exp(-x1^2)", "--domain", "[-5,5]", "--size", "20",
                 "--n", "100", "--out", str(out), "--all-proposals"]) == 0
    rows = _rows(out)
    assert sum(r.split(",")[2] == "1" for r in rows[1:]) == 100


@pytest.mark.parametrize("argv", [
    ["sample", "--formula", "exp(-x1^2", "--domain", "[-5,5]"],
    ["sample", "--formula", "x1 + x2", "--domain", "[-5,5]"],
    ["sample", "--target", "nope"],
    ["sample", "--target", "g1", "--formula", "x1", "--domain", "[0,1]"],
    ["sample", "--formula", "x1"],
    ["sample", "--target", "g1", "--domain", "[1,0]"],
    ["sample", "--target", "g1", "--size", "0"],
    ["sample", "--bogus"],
    ["sweep", "--target", "g1", "--sizes", "a,b"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path / "x.csv")]) == 2


def test_runtime_error_exits_1(tmp_path):
    assert main(["sample", "--formula", "1/x1", "--domain", "[-1,1]",
                 "--out", str(tmp_path / "x.csv")]) == 1


@pytest.mark.parametrize("cmd", COMMANDS)
def test_help_exits_0(cmd, capsys):
    assert main([cmd, "--help"]) == 0
    assert "usage:" in capsys.readouterr().out


@pytest.mark.parametrize("cmd", COMMANDS)
def test_rerun_is_byte_identical(cmd, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(RUNS[cmd] + ["--out", str(a)]) == 0
    assert main(RUNS[cmd] + ["--out", str(a).replace("a.csv", "b.csv")]) == 0
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# out=")]
    assert strip(a) == strip(b)
    assert len(_rows(a)) > 1


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"target": "needle", "param": {"sigma2": 0.01}, "size": 7,
                               "scheme": "range"}))
    out = tmp_path / "p.csv"
    assert main(["partition-dump", "--config", str(cfg), "--size", "12", "--out", str(out)]) == 0
    text = out.read_text().splitlines()
    assert "# size=12" in text and '# scheme="range"' in text
    assert len(_rows(out)) == 13
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    assert main(["partition-dump", "--config", str(bad), "--target", "g1"]) == 2


def test_timing_flag_controls_cpu_column(tmp_path):
    out = tmp_path / "t.csv"
    argv = ["sweep", "--target", "g1", "--sizes", "1,4", "--max-accepts", "10", "--out", str(out)]
    assert main(argv) == 0
    assert all(r.endswith(",NA") for r in _rows(out)[1:])
    assert main(argv + ["--timing"]) == 0
    assert not any(r.endswith(",NA") for r in _rows(out)[1:])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "moore_rs", "partition-dump", "--target", "g1",
                           "--size", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1].count(",") == 4
