import pytest

from shapererrors import EXIT_VALIDATION, ValidationFailure
from validation import (OUTAGE_CURVE_FIELDS, Suite, ValidationRow, check_rows, outage_cases,
                        outage_curve, outage_suite, queue_suite, rollout_suite, run_validation)


def test_outage_cases(net, qos):
    cases = outage_cases(net, qos)
    names = [c[0] for c in cases]
    assert names == ["ssu phi=0.25", "ssu phi=0.5", "ssu phi=1", "mmu rho_m=20",
                     "msu d_ms=400", "msu d_ms=600", "msu d_ms=800"]
    msu = {c[0]: c for c in cases if c[0].startswith("msu")}
    # the far MSU case needs a larger macro disc
    assert msu["msu d_ms=800"][2].macro.coverage_radius_m == 1100.0
    assert msu["msu d_ms=400"][2].macro.coverage_radius_m == 1000.0
    analytic = [msu[f"msu d_ms={d}"][7] for d in (400, 600, 800)]
    assert analytic == sorted(analytic)
    assert analytic[1] == pytest.approx(0.0111, abs=5e-4)


def test_outage_suite_passes(net, qos):
    rows = outage_suite(net, qos, samples=5000, seed=0, workers=2)
    assert len(rows) == 7
    assert all(r.suite == "outage" for r in rows)
    assert all(r.passed for r in rows), [r for r in rows if not r.passed]


@pytest.mark.slow
def test_queue_suite_passes():
    rows = queue_suite(200_000, seed=0)
    assert len(rows) == 12
    assert all(r.passed for r in rows), [r for r in rows if not r.passed]
    rates = [r for r in rows if r.case.startswith("shutdown")]
    assert all(r.relative for r in rates)


def test_rollout_suite_passes(net, qos):
    rows = rollout_suite(net, qos, seed=0, expected_arrivals=2e4)
    assert [r.case for r in rows] == ["active lambda=50", "sc off"]
    assert all(r.passed for r in rows), rows
    assert rows[1].analytic == rows[1].simulated


def test_run_validation_single_suite(net, qos):
    rows = run_validation(Suite.ROLLOUT, net, qos, seed=1)
    assert {r.suite for r in rows} == {"rollout"}
    assert run_validation("rollout", net, qos, seed=1) == rows


def test_check_rows():
    good = ValidationRow("queue", "p_off rho=0.5", 0.5, 0.501, 0.01, False, True)
    bad = ValidationRow("queue", "p_one rho=0.5", 0.32, 0.4, 0.01, False, False)
    check_rows([good])
    with pytest.raises(ValidationFailure) as e:
        check_rows([good, bad])
    assert e.value.error_code == EXIT_VALIDATION
    assert e.value.failures == [bad]


def test_outage_curve_against_rate_threshold(net, qos):
    grid = [50e3, 100e3, 200e3]
    rows = outage_curve(net, qos, grid, samples=5000, seed=3, workers=2)
    assert [(r.r_th_bps, r.user_class) for r in rows] == \
        [(r_th, c) for r_th in grid for c in ("SSU", "MSU", "MMU")]
    assert all(r.ci_low <= r.simulated <= r.ci_high for r in rows)

    by_class = {c: [r for r in rows if r.user_class == c] for c in ("SSU", "MSU", "MMU")}
    for curve in by_class.values():
        analytic = [r.analytic for r in curve]
        assert analytic == sorted(analytic)
        assert curve[-1].simulated > curve[0].simulated
    # the bandwidths are sized for the configured R_th of 100 kbps
    for name in ("SSU", "MMU"):
        nominal = by_class[name][1]
        assert nominal.analytic == pytest.approx(qos.outage_target, abs=0.015)
        assert nominal.simulated == pytest.approx(qos.outage_target, abs=0.02)

    assert outage_curve(net, qos, grid, samples=500, seed=3) == \
        outage_curve(net, qos, grid, samples=500, seed=3, workers=3)
    assert OUTAGE_CURVE_FIELDS[:2] == ("r_th_bps", "user_class")
    with pytest.raises(ValueError):
        outage_curve(net, qos, [], samples=100)
