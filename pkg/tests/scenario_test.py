import numpy as np
import pytest

from config.profiles import DailyProfiles, Period, synthetic_day
from modelcore import snapshot_per_km2
from scenario import (DAY_FIELDS, SWEEP_FIELDS, DayRow, PolicyChoice, format_value, gain_curve,
                      load_config, parallel_map, run_day, run_scaled_days, sweep_gain, to_csv)


@pytest.fixture
def configs():
    return load_config()


@pytest.fixture
def day():
    return synthetic_day(5.0, 100.0, 40.0)


def rows_for(report, c_ho, policy):
    return [r for r in report.rows if r.c_ho == c_ho and r.policy == policy]


def test_parallel_map_keeps_order():
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert parallel_map(lambda x: x, [], workers=4) == []


def test_policy_choice():
    assert PolicyChoice.BOTH.policies() == ("eots", "greedy")
    assert PolicyChoice("greedy").policies() == ("greedy",)


def test_day_rows_and_dominance(configs, day):
    report = run_day(day, configs, PolicyChoice.BOTH, [0.0, 5.0])
    assert len(report.rows) == 24 * 2 * 2
    assert [s.c_ho for s in report.summaries] == [0.0, 5.0]
    for c_ho in (0.0, 5.0):
        eots = rows_for(report, c_ho, "eots")
        greedy = rows_for(report, c_ho, "greedy")
        assert [r.period for r in eots] == list(range(24))
        for e, g in zip(eots, greedy):
            assert not e.infeasible
            assert e.delta_p_w >= 0.0
            assert e.delta_p_w >= g.delta_p_w - 1e-9
            assert g.activate_sc

    # free handovers: greedy is already optimal
    free = report.summaries[0]
    assert free.avg_gain_eots_w == pytest.approx(free.avg_gain_greedy_w, rel=1e-9, abs=1e-9)
    assert free.avg_gain_eots_w > 0
    costly = report.summaries[1]
    assert costly.avg_gain_eots_w > costly.avg_gain_greedy_w
    # costly handovers: the always-on SC loses power over the day, EOTS never does
    assert costly.avg_gain_greedy_w < 0.0 <= costly.avg_gain_eots_w
    assert min(r.delta_p_w for r in rows_for(report, 5.0, "greedy")) < 0
    assert all(s.infeasible_periods == 0 for s in report.summaries)


def test_dark_day_has_no_gain(configs, day):
    dark = day.scaled(1.0, 1.0, 0.0)
    report = run_day(dark, configs, PolicyChoice.BOTH, [1.0])
    summary = report.summaries[0]
    assert summary.avg_gain_eots_w == 0.0
    assert summary.avg_gain_greedy_w == pytest.approx(0.0, abs=1e-12)
    assert not any(r.activate_sc for r in rows_for(report, 1.0, "eots"))


def test_single_policy_summary(configs, day):
    report = run_day(day, configs, PolicyChoice.EOTS, [1.0])
    assert {r.policy for r in report.rows} == {"eots"}
    assert report.summaries[0].avg_gain_greedy_w is None


def test_infeasible_period_is_flagged(configs):
    periods = [Period(0.0, 3600.0, 5.0, 60.0, 30.0, "calm"),
               Period(3600.0, 3600.0, 20.0, 60.0, 30.0, "rush")]
    report = run_day(DailyProfiles(periods), configs, PolicyChoice.BOTH, [1.0])
    flagged = [r for r in report.rows if r.infeasible]
    assert {r.period for r in flagged} == {1}
    assert all(r.delta_p_w is None for r in flagged)
    summary = report.summaries[0]
    assert summary.infeasible_periods == 1
    calm = [r for r in report.rows if r.period == 0 and r.policy == "eots"][0]
    assert summary.avg_gain_eots_w == pytest.approx(calm.delta_p_w)


def test_workers_do_not_change_results(configs, day):
    serial = run_day(day, configs, PolicyChoice.BOTH, [0.0, 2.0], workers=1)
    threaded = run_day(day, configs, PolicyChoice.BOTH, [0.0, 2.0], workers=4)
    assert to_csv(serial.rows, DAY_FIELDS) == to_csv(threaded.rows, DAY_FIELDS)


def test_scaled_days(configs, day):
    fractions = synthetic_day(1.0, 1.0, 1.0)
    report = run_scaled_days(fractions, configs, PolicyChoice.BOTH, [0.0, 5.0], [20.0, 40.0],
                             rho_m_max=5.0, rho_s_max=100.0, workers=2)
    assert [(s.lambda_max, s.c_ho) for s in report.summaries] == \
        [(20.0, 0.0), (20.0, 5.0), (40.0, 0.0), (40.0, 5.0)]
    assert len(report.rows) == 2 * 24 * 2 * 2
    assert {r.lambda_max for r in report.rows} == {20.0, 40.0}
    for s in report.summaries:
        assert s.avg_gain_eots_w >= 0.0
        assert s.avg_gain_eots_w >= s.avg_gain_greedy_w - 1e-9

    single = run_day(day, configs, PolicyChoice.BOTH, [0.0, 5.0])
    for scaled, direct in zip(report.summaries[2:], single.summaries):
        assert scaled.avg_gain_eots_w == pytest.approx(direct.avg_gain_eots_w)
        assert scaled.avg_gain_greedy_w == pytest.approx(direct.avg_gain_greedy_w)
    assert single.summaries[0].lambda_max is None
    with pytest.raises(ValueError):
        run_scaled_days(fractions, configs, PolicyChoice.EOTS, [0.0], [])


def test_sweep(configs):
    traffic = snapshot_per_km2(5.0, 60.0)
    grid = np.linspace(0.0, 100.0, 51)
    rows = sweep_gain(configs, traffic, grid, [0.0, 1.0, 2.0], workers=2)
    assert len(rows) == 3 * 51
    for c_ho in (0.0, 1.0, 2.0):
        column = [r for r in rows if r.c_ho == c_ho]
        assert [r.lambda_e for r in column] == list(grid)
        assert all(r.delta_p_eots_w == max(0.0, r.delta_p_active_w) for r in column)
        # beyond mu_max every column sits on the same energy-sufficient plateau
        plateau = [r.delta_p_eots_w for r in column if r.lambda_e >= 70.0]
        assert plateau == pytest.approx([23.6] * len(plateau), abs=0.05)
        assert all(r.regime == "EnergySufficientLinear" for r in column if r.lambda_e >= 70.0)

    free = [r.delta_p_eots_w for r in rows if r.c_ho == 0.0]
    assert all(b >= a - 1e-9 for a, b in zip(free, free[1:]))
    assert free[0] == 0.0
    with pytest.raises(ValueError):
        sweep_gain(configs, traffic, [], [0.0])


def test_forced_active_gain_has_one_dip(configs):
    traffic = snapshot_per_km2(5.0, 60.0)
    grid = np.linspace(0.0, 100.0, 51)
    rows = sweep_gain(configs, traffic, grid, [0.5, 1.0, 2.0, 5.0])
    for c_ho in (0.5, 1.0, 2.0, 5.0):
        gains = np.array([r.delta_p_active_w for r in rows if r.c_ho == c_ho])
        steps = np.diff(gains)
        signs = np.sign(steps[np.abs(steps) > 1e-9])
        # handovers drag the gain down before the harvest lifts it to the plateau
        assert np.count_nonzero((signs[:-1] < 0) & (signs[1:] > 0)) == 1
        assert gains.min() < 0.0 < gains[-1]


def test_gain_curve(configs):
    net, qos, energy = configs
    curve_configs = (net, qos, energy.with_(arrival_rate_per_s=62.0, handover_cost_j=1.0))
    rows = gain_curve(curve_configs, snapshot_per_km2(5.0, 60.0), 21)
    assert len(rows) == 21
    assert rows[0].mu_e == 56.0
    assert all(b.mu_e > a.mu_e for a, b in zip(rows, rows[1:]))
    p_off = [r.p_off for r in rows]
    assert all(b >= a for a, b in zip(p_off, p_off[1:]))
    assert all(r.p_ho_w == 0.0 for r in rows if r.mu_e <= 62.0)


def test_csv_format():
    row = DayRow(0, 0.0, 3600.0, 0.1, "eots", True, 1 / 3, None, 0.0, -2.5,
                 "InteriorConcave", False, None)
    text = to_csv([row], DAY_FIELDS)
    header, line = text.splitlines()
    assert header == ",".join(DAY_FIELDS)
    assert line == "0,0.0,3600.0,0.1,eots,true,0.3333333333333333,,0.0,-2.5,InteriorConcave,false,"
    assert text.endswith("\n")
    assert format_value(np.float64(0.1)) == "0.1"
    assert format_value(PolicyChoice.EOTS) == "eots"
    assert to_csv([], SWEEP_FIELDS) == ",".join(SWEEP_FIELDS) + "\n"
