import csv
import subprocess
import sys
from pathlib import Path

import pytest

from fuzzycharge import __version__
from fuzzycharge.cli import main
from fuzzycharge.configfile import load_controller, load_packaged
from fuzzycharge.controllers import MfFamily

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_infer_large_dtemp(capsys):
    assert main(["infer", "triangular", "--dtemp", "3.0", "--time", "10"]) == 0
    assert capsys.readouterr().out.strip() == "output=1.000 decision=CONTINUE"


def test_infer_from_config_file(tmp_path, capsys):
    from fuzzycharge.configfile import dump_controller

    main_cfg, timer = load_packaged(MfFamily.TRAPEZOIDAL)
    path = tmp_path / "c.ini"
    dump_controller(main_cfg, timer, path)
    assert main(["infer", str(path), "--dtemp", "0.0", "--time", "13"]) == 0
    assert capsys.readouterr().out.strip() == "output=0.000 decision=STOP"


def test_surface(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["surface", "gaussian", "--out", str(out), "--dtemp-step", "0.5", "--time-step", "10"]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["dtemp_c", "time_min", "output"]
    assert len(rows) == 1 + 3 * 5
    assert all(0.0 <= float(r[2]) <= 1.0 for r in rows[1:])


def test_run_writes_logs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", str(SCENARIOS / "default.ini"), "crisp-refined", "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"samples.csv", "tests.csv", "report.txt"}
    assert "recommended charge 100 g" in (out / "report.txt").read_text()
    assert capsys.readouterr().out.startswith("controller crisp-refined, 1 unit(s)")


def test_run_reports_failed_unit(tmp_path):
    scen = tmp_path / "bad.ini"
    scen.write_text("[plant]\nt_opt = -200\ntau = 20\n\n[run]\ncontroller = crisp-simple\nmax_test_time = 5\n")
    assert main(["run", str(scen), "--out", str(tmp_path / "o")]) == 1
    assert "FAILED" in (tmp_path / "o" / "report.txt").read_text()


def test_run_with_controller_config(tmp_path):
    from fuzzycharge.configfile import dump_controller

    m, t = load_packaged(MfFamily.GAUSSIAN)
    cfg = tmp_path / "g.ini"
    dump_controller(m, t, cfg)
    assert main(["run", str(SCENARIOS / "default.ini"), "fuzzy-gaussian", "--controller-config", str(cfg),
                 "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("which, name, first", [
    ("table2", "table2.csv", "controller,band_lo,band_hi,tt_min,ts_min,improvement_pct"),
    ("table3", "table3.csv", "controller,case,tt_min,tests_12h,kwh_per_test"),
    ("fig19", "fig19.csv", "time_min,controller,case,tests"),
    ("fig20", "fig20.csv", "time_min,kwh_per_test"),
])
def test_bench_outputs(tmp_path, which, name, first):
    assert main(["bench", which, "--out", str(tmp_path)]) == 0
    assert (tmp_path / name).read_text().splitlines()[0] == first


def test_bench_table3_rows(tmp_path, capsys):
    assert main(["bench", "table3", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "table3.csv").read_text().splitlines()[1:]
    assert lines == ["crisp-refined,best,20.0,20,1.500", "crisp-refined,worst,30.0,16,1.875",
                     "fuzzy-trapezoidal,best,8.8,30,1.000", "fuzzy-trapezoidal,worst,27.0,17,1.765"]


def test_calibrate_writes_loadable_config(tmp_path):
    out = tmp_path / "tri.ini"
    assert main(["calibrate", "triangular", "--out", str(out)]) == 0
    m, _ = load_controller(out)
    assert m == load_packaged(MfFamily.TRIANGULAR_MIX)[0]
    assert out.read_text().startswith("# Calibrated triangular controller")


# -- exit codes -----------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["infer", "triangular", "--dtemp", "0.1"],
    ["infer", "triangular", "--dtemp", "x", "--time", "1"],
    ["bench", "table9", "--out", "x"],
    ["run", "s.ini", "fuzzy-bell", "--out", "x"],
    ["--bogus"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "usage:" in capsys.readouterr().err


def test_config_errors_exit_3(tmp_path, capsys):
    assert main(["infer", str(tmp_path / "missing.ini"), "--dtemp", "0", "--time", "0"]) == 3
    bad = tmp_path / "bad.ini"
    bad.write_text("[controller]\nfamily = triangular\n")
    assert main(["infer", str(bad), "--dtemp", "0", "--time", "0"]) == 3
    scen = tmp_path / "s.ini"
    scen.write_text("[plant]\nwarp = 1\n")
    assert main(["run", str(scen), "--out", str(tmp_path / "o")]) == 3
    assert "config error" in capsys.readouterr().err


def test_runtime_error_exit_1(tmp_path, capsys):
    # a plateau table whose band cannot hold its probe makes the bench drift
    pl = tmp_path / "p.ini"
    pl.write_text("[plateau]\ncharge = 110\n\n[band.1]\nlo = 0.0\nhi = 0.1\nprobes = 0.3\ntau = 1200\n")
    assert main(["bench", "table2", "--out", str(tmp_path), "--plateaus", str(pl)]) == 1
    assert "error" in capsys.readouterr().err


def test_version_and_module_entry():
    out = subprocess.run([sys.executable, "-m", "fuzzycharge", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == f"fuzzycharge {__version__}"
    out = subprocess.run([sys.executable, "-m", "fuzzycharge", "nope"], capture_output=True, text=True)
    assert out.returncode == 2
