import csv
import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from fuzzycharge.bench import (
    BASELINE,
    ScenarioDrift,
    Table3Row,
    bench_table2,
    bench_table3,
    cumulative_tests,
    emit_fig19,
    emit_fig20,
    energy,
    improvement_pct,
    indicators,
    load_plateaus,
    measure_plateau,
    pr_ratio,
    tests_per_day as per_day,
    throughput_and_energy,
    write_table3_csv,
)
from fuzzycharge.runner import make_controller


@pytest.mark.parametrize("tt, base, want", [(8.8, 30, 70.6667), (27, 30, 10.0), (30, 30, 0.0)])
def test_improvement_examples(tt, base, want):
    assert improvement_pct(tt, base) == pytest.approx(want, abs=1e-3)


@given(st.floats(0, 100), st.floats(0.1, 100))
def test_improvement_identity(tt, base):
    assert improvement_pct(tt, base) + 100 * tt / base == pytest.approx(100.0, abs=1e-9)


def test_pr_ratio_and_errors():
    assert pr_ratio(8.8, 30.0) == pytest.approx(0.29333, abs=1e-5)
    with pytest.raises(ValueError):
        pr_ratio(1.0, 0.0)
    with pytest.raises(ValueError):
        improvement_pct(1.0, 0.0)


@pytest.mark.parametrize("p, h, want", [(2.5, 12, 30.0), (0, 5, 0.0), (2.5, 0.5, 1.25)])
def test_energy(p, h, want):
    assert energy(p, h) == pytest.approx(want)


def test_energy_rejects_negative():
    with pytest.raises(ValueError):
        energy(-1, 1)


@pytest.mark.parametrize("tt, tests, kwh", [(20, 20, 1.5), (8.8, 30, 1.0), (30, 16, 1.875), (27, 17, 30 / 17)])
def test_throughput_rows(tt, tests, kwh):
    got = throughput_and_energy(tt, 15, 2.5)
    assert got[0] == tests == oracle.tests_in_day(tt, 15)
    assert got[1] == pytest.approx(kwh, abs=1e-12)


@given(st.floats(0.5, 100), st.floats(0, 60))
def test_tests_per_day_matches_counting_oracle(tt, setup):
    assert per_day(tt, setup) == oracle.tests_in_day(tt, setup)


def test_zero_tests_means_infinite_energy():
    assert throughput_and_energy(800, 15) == (0, math.inf)


def test_indicators_bundle():
    ind = indicators(8.8, 30.0)
    assert ind.ts == pytest.approx(21.2) and ind.tpd == 30 and ind.energy_per_test == pytest.approx(1.0)
    assert ind.tph == pytest.approx(60 / 23.8)


# -- plateaus and table2 --------------------------------------------------------

@pytest.fixture(scope="module")
def report():
    return bench_table2()


def test_plateau_table_shape():
    t = load_plateaus()
    assert [b.lo for b in t.bands] == [0.4, 0.35, 0.25, 0.0]
    assert all(b.lo <= p <= b.hi for b in t.bands for p in b.probes)


def test_plateau_start_dtemp_on_probe():
    t = load_plateaus()
    for band in t.bands:
        for d0 in band.probes:
            ctl = make_controller(BASELINE)
            assert measure_plateau(ctl, t, band, d0) == pytest.approx(30.0, abs=0.1)


def test_scenario_drift_detected():
    t = load_plateaus()
    band = t.bands[0]
    wrong = replace(band, lo=0.0, hi=0.1)
    with pytest.raises(ScenarioDrift):
        measure_plateau(make_controller("crisp-simple"), t, wrong, 0.45)


def test_baseline_row_zero(report):
    rows = [r for r in report.rows if r.controller == BASELINE]
    assert all(r.tt == 30.0 and r.ts == 0.0 and r.improvement_pct == 0.0 for r in rows)


@pytest.mark.parametrize("name, lo, tt, pct", [
    ("crisp-refined", 0.0, 20.0, 33.3),
    ("fuzzy-triangular", 0.25, 20.0, 33.3),
    ("fuzzy-gaussian", 0.4, 26.2, 12.6),
])
def test_table2_examples(report, name, lo, tt, pct):
    for r in report.cell(name, lo):
        assert r.tt == pytest.approx(tt, abs=0.5)
        assert r.improvement_pct == pytest.approx(pct, abs=0.5)
        assert r.ts == pytest.approx(30.0 - r.tt)


def test_table2_parallel_equals_serial(report):
    assert bench_table2(workers=4) == report


def test_table2_csv(report, tmp_path):
    p = tmp_path / "t2.csv"
    report.write_csv(p)
    text = p.read_text()
    assert text.splitlines()[0] == "controller,band_lo,band_hi,tt_min,ts_min,improvement_pct"
    assert "fuzzy-trapezoidal,0,0.25,8.8,21.2,70.7" in text
    report.write_csv(tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_text() == text


# -- table3 and curves ----------------------------------------------------------

def test_table3_from_measurements(report, tmp_path):
    rows = bench_table3(report)
    got = [(r.controller, r.case, r.tt, r.tests_12h) for r in rows]
    assert got == [("crisp-refined", "best", 20.0, 20), ("crisp-refined", "worst", 30.0, 16),
                   ("fuzzy-trapezoidal", "best", 8.8, 30), ("fuzzy-trapezoidal", "worst", 27.0, 17)]
    write_table3_csv(rows, tmp_path / "t3.csv")
    lines = (tmp_path / "t3.csv").read_text().splitlines()
    assert lines[0] == "controller,case,tt_min,tests_12h,kwh_per_test"
    assert lines[1:] == ["crisp-refined,best,20.0,20,1.500", "crisp-refined,worst,30.0,16,1.875",
                         "fuzzy-trapezoidal,best,8.8,30,1.000", "fuzzy-trapezoidal,worst,27.0,17,1.765"]


def test_fig19_step_function(tmp_path):
    rows = [Table3Row("x", "best", 8.8, 30, 1.0)]
    out = emit_fig19(rows, tmp_path / "f.csv")
    at = {t: k for t, _, _, k in out}
    assert at[0.0] == 0
    assert cumulative_tests(2 * 23.8, 8.8) == 2
    assert at[720.0] == 30
    assert all(b >= a for a, b in zip([k for *_, k in out], [k for *_, k in out][1:]))
    with open(tmp_path / "f.csv") as fh:
        assert next(csv.reader(fh)) == ["time_min", "controller", "case", "tests"]


def test_fig20_rows():
    rows = emit_fig20(8.8)
    assert rows[0][0] == pytest.approx(23.8)
    assert rows[0][1] == pytest.approx(2.5 * 23.8 / 60, abs=1e-12)  # 0.99 kWh
    assert len(rows) == 30
    assert all(abs(e - 1.0) <= 0.05 for _, e in rows)
    assert emit_fig20(800.0) == []
