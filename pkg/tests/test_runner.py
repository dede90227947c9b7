import csv
from dataclasses import replace

import pytest

import oracle
from fuzzycharge.bench import load_plateaus
from fuzzycharge.decisions import Decision
from fuzzycharge.plant import Plant, PlantParams, t_stab, temperature
from fuzzycharge.runner import (
    CONTROLLER_NAMES,
    SAMPLE_HEADER,
    TEST_HEADER,
    RunConfig,
    StopReason,
    TestRecord,
    TimerNeverStarted,
    detect_optimum,
    make_controller,
    run_bank,
    run_full_procedure,
    run_single_charge,
    write_samples_csv,
    write_tests_csv,
)

P = PlantParams()


def _rec(q, temp):
    return TestRecord(q, temp, 10.0, 1.0, StopReason.CONTROLLER_STOP)


def test_run_config_validation():
    for kw in (dict(increment=0), dict(initial_charge=200), dict(controller="magic"), dict(optimum_patience=0),
               dict(max_test_time=0), dict(dtemp_span=0)):
        with pytest.raises(ValueError):
            RunConfig(**kw)


def test_make_controller():
    assert make_controller("crisp-simple").main is None
    c = make_controller("fuzzy-gaussian")
    assert c.is_fuzzy and c.main.family.value == "gaussian"
    with pytest.raises(ValueError):
        make_controller("fuzzy-bell")


# -- detect_optimum -------------------------------------------------------------

@pytest.mark.parametrize("temps, want", [
    ([-15, -18, -20, -19, -17], 70.0),
    ([-15, -18, -20, -21], None),
    ([-15, -20, -19], None),
    ([-15, -20, -20.0, -19], None),  # flat is not a rise
])
def test_detect_optimum(temps, want):
    recs = [_rec(50.0 + 10 * i, t) for i, t in enumerate(temps)]
    assert detect_optimum(recs, 2) == want


def test_detect_optimum_needs_records():
    with pytest.raises(ValueError):
        detect_optimum([], 2)


# -- single test ----------------------------------------------------------------

def _first_below(samples, bound):
    for row in samples:
        if row[4] != "" and float(row[4]) < bound:
            return float(row[2])
    return None


def test_crisp_simple_waits_30_minutes_after_first_low_dtemp():
    plant = Plant(P, 60.0)
    log = []
    rec = run_single_charge(plant, make_controller("crisp-simple"), RunConfig(controller="crisp-simple"), 1, log)
    assert rec.stop_reason is StopReason.CONTROLLER_STOP
    assert rec.timer_start == _first_below(log, 0.5)
    assert rec.observation_time == pytest.approx(30.0, abs=P.scan_interval)


def test_triangular_plateau_010_stops_in_12_minutes():
    table = load_plateaus()
    band = next(b for b in table.bands if b.lo == 0.0)
    plant = Plant(table.plant_for(band, 0.10), table.charge)
    ctl = make_controller("fuzzy-triangular")
    rec = run_single_charge(plant, ctl, RunConfig(controller=ctl.name))
    assert rec.start_dtemp == pytest.approx(0.10, abs=0.01)
    assert rec.observation_time == pytest.approx(12.0, abs=1.0)


def test_timer_never_started():
    steep = PlantParams(t_opt=-200.0, tau=20.0)
    cfg = RunConfig(controller="crisp-simple", max_test_time=5.0)
    with pytest.raises(TimerNeverStarted):
        run_single_charge(Plant(steep, 60.0), make_controller("crisp-simple"), cfg)


def test_max_time_reached():
    # a fuzzy controller with its stop threshold pushed to the bottom never says stop
    ctl = make_controller("fuzzy-trapezoidal")
    ctl = replace(ctl, main=replace(ctl.main, decision_threshold=1e-6))
    cfg = RunConfig(controller=ctl.name, max_test_time=10.0)
    rec = run_single_charge(Plant(P, 60.0), ctl, cfg)
    assert rec.stop_reason is StopReason.MAX_TIME_REACHED
    assert rec.observation_time == pytest.approx(10.0)


@pytest.mark.parametrize("name", CONTROLLER_NAMES)
def test_record_invariants_and_replay(name):
    cfg = RunConfig(controller=name)
    ctl = make_controller(name)
    rep = run_full_procedure(P, cfg, ctl, unit=3, log_samples=True)
    for r in rep.records:
        assert 0 < r.test_time_TT <= cfg.max_test_time + r.timer_start + 1e-9
        rows = [s for s in rep.samples if float(s[1]) == r.charge_q]
        # min_temp is the minimum of the samples logged in that test
        assert r.min_temp == min(float(s[3]) for s in rows)
        last = rows[-1]
        assert last[7] == Decision.STOP.value
        t_start = next(float(s[2]) for s in rows if s[5] == "1")
        obs = round(float(last[2]) - t_start, 9)
        assert ctl.decide(float(last[4]), obs)[1] is Decision.STOP
        assert all(s[7] == Decision.CONTINUE.value for s in rows[:-1] if s[5] == "1")


def test_min_temp_bounds_on_cooling_transients():
    rep = run_full_procedure(P, RunConfig(controller="crisp-simple"))
    t_from = P.t_initial
    for r in rep.records:
        ts = t_stab(P, r.charge_q)
        if t_from >= ts:
            assert ts <= r.min_temp <= ts + 0.5
        else:
            # the unit starts colder than the new asymptote and warms, so the
            # coldest reading is the first sample of the test
            assert r.min_temp < ts
        # temperature carried into the next charge level
        t_from = temperature(P, r.charge_q, r.test_time_TT, t_from)


def test_fuzzy_triangular_never_slower_than_crisp_simple():
    cfg = RunConfig(optimum_patience=10)
    a = run_full_procedure(P, replace(cfg, controller="crisp-simple"))
    b = run_full_procedure(P, replace(cfg, controller="fuzzy-triangular"))
    assert [r.charge_q for r in a.records] == [r.charge_q for r in b.records]
    for x, y in zip(a.records, b.records):
        assert y.test_time_TT <= x.test_time_TT


def test_median_filter_changes_only_the_minimum():
    noisy = PlantParams(noise_sigma=0.2, seed=5)
    ctl = make_controller("crisp-refined")
    raw = run_single_charge(Plant(noisy, 60.0), ctl, RunConfig(controller=ctl.name))
    med = run_single_charge(Plant(noisy, 60.0), ctl, RunConfig(controller=ctl.name, median_filter=True))
    assert raw.test_time_TT == med.test_time_TT
    assert med.min_temp > raw.min_temp


# -- full procedure -------------------------------------------------------------

def _oracle_argmin(report, params):
    visited = [r.charge_q for r in report.records]
    return min(visited, key=lambda q: oracle.t_stab(q, params.q_opt, params.t_opt, params.curvature_k))


@pytest.mark.parametrize("name", CONTROLLER_NAMES)
def test_full_procedure_recommends_near_optimum(name):
    cfg = RunConfig(controller=name)
    rep = run_full_procedure(P, cfg)
    assert rep.recommended_charge in {90.0, 100.0, 110.0}
    assert abs(rep.recommended_charge - _oracle_argmin(rep, P)) <= cfg.increment
    assert rep.recommended_charge in [q for q, _ in rep.chart]
    # 60 g to 100 g is five tests, plus two rises to confirm
    assert len(rep.records) == 7


def test_starting_near_optimum_takes_four_to_six_tests():
    rep = run_full_procedure(P, RunConfig(initial_charge=80.0))
    assert 4 <= len(rep.records) <= 6


def test_oversized_increment_gives_one_record():
    rep = run_full_procedure(P, RunConfig(initial_charge=60.0, increment=200.0, max_charge=160.0))
    assert len(rep.records) == 1 and rep.recommended_charge == 60.0


def test_summary_text():
    text = run_full_procedure(P, RunConfig(), unit=2).summary()
    assert text.startswith("unit 2: 7 tests, recommended charge 100 g")


# -- banks ----------------------------------------------------------------------

def test_bank_units_differ_by_q_opt():
    units = [P, replace(P, q_opt=120.0)]
    out = run_bank(units, RunConfig(max_charge=200.0), log_samples=False)
    assert [o.unit for o in out] == [1, 2]
    got = [o.report.recommended_charge for o in out]
    for o, u in zip(out, units):
        assert abs(o.report.recommended_charge - _oracle_argmin(o.report, u)) <= 10.0
    assert got[1] - got[0] == pytest.approx(20.0, abs=10.0)


def test_identical_units_identical_reports():
    out = run_bank([PlantParams(noise_sigma=0.03, seed=4)] * 8, RunConfig(), mode="thread")
    first = out[0].report
    assert all(o.report.records == first.records for o in out)
    # sample rows differ only in the unit column
    assert all([s[1:] for s in o.report.samples] == [s[1:] for s in first.samples] for o in out)


def test_bank_isolates_failures():
    bad = PlantParams(t_opt=-200.0, tau=20.0)
    out = run_bank([P, bad, P], RunConfig(controller="crisp-simple", max_test_time=5.0), mode="thread")
    assert [o.ok for o in out] == [True, False, True]
    assert "TimerNeverStarted" in out[1].error


def test_bank_size_limits():
    with pytest.raises(ValueError):
        run_bank([], RunConfig())
    with pytest.raises(ValueError):
        run_bank([P] * 9, RunConfig())
    with pytest.raises(ValueError):
        run_bank([P], RunConfig(), mode="gpu")


def test_csv_writers(tmp_path):
    out = run_bank([P, replace(P, seed=1)], RunConfig(controller="crisp-refined"))
    write_samples_csv(out, tmp_path / "s.csv")
    write_tests_csv(out, tmp_path / "t.csv")
    with open(tmp_path / "s.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SAMPLE_HEADER
    assert {r[0] for r in rows[1:]} == {"1", "2"}
    assert {r[7] for r in rows[1:]} == {"WAIT", "CONTINUE", "STOP"}
    with open(tmp_path / "t.csv") as fh:
        trows = list(csv.reader(fh))
    assert tuple(trows[0]) == TEST_HEADER
    assert len(trows) == 1 + sum(len(o.report.records) for o in out)
