import math

import pytest
from hypothesis import given, strategies as st

from energyqueue import analyze_queue
from shapererrors import DomainError
from conftest import make_energy


def test_half_utilization():
    q = analyze_queue(make_energy(0.5), 1.0)
    assert q.stable
    assert q.utilization == 0.5
    assert q.off_probability == 0.5
    assert q.p_one == pytest.approx(0.3244, abs=1e-4)
    assert q.shutdown_rate_per_s == pytest.approx(0.1968, abs=1e-4)
    assert q.cycle_rate_per_s == pytest.approx(0.25)


def test_unstable_queue_never_sleeps():
    q = analyze_queue(make_energy(2.0, c_ho=3.0), 1.0)
    assert not q.stable
    assert q.off_probability == 0.0
    assert q.handover_power_w == 0.0


def test_free_handovers():
    assert analyze_queue(make_energy(0.7, c_ho=0.0), 1.0).handover_power_w == 0.0


def test_handover_power_is_two_handovers_per_shutdown():
    q = analyze_queue(make_energy(0.7, c_ho=1.5), 1.0)
    assert q.handover_power_w == pytest.approx(2 * 1.5 * q.shutdown_rate_per_s)
    assert q.shutdown_rate_per_s == pytest.approx(0.3 * math.expm1(0.7) * math.exp(-0.7))


def test_p_one_limits():
    assert analyze_queue(make_energy(1e-6), 1.0).p_one < 1e-5
    assert analyze_queue(make_energy(1 - 1e-6), 1.0).p_one < 1e-5


def test_handover_power_vanishes_at_stability_boundary():
    eps, c_ho, mu = 1e-3, 1.0, 1.0
    assert analyze_queue(make_energy(1 - eps, c_ho), mu).handover_power_w < eps * 10 * c_ho * mu


def test_rejects_nonpositive_rate():
    with pytest.raises(DomainError):
        analyze_queue(make_energy(0.5), 0.0)
    with pytest.raises(DomainError):
        analyze_queue(make_energy(0.5), -2.0)


@given(lam=st.floats(0.0, 200.0), mu=st.floats(0.01, 200.0), c_ho=st.floats(0.0, 10.0))
def test_probabilities_are_consistent(lam, mu, c_ho):
    q = analyze_queue(make_energy(lam, c_ho), mu)
    assert 0.0 <= q.off_probability <= 1.0
    assert 0.0 <= q.p_one <= 1.0
    assert q.off_probability + q.p_one <= 1.0 + 1e-12
    assert q.handover_power_w >= 0.0
    # the closed-form shutdown rate never exceeds the busy-cycle rate
    assert q.shutdown_rate_per_s <= q.cycle_rate_per_s * (1 + 1e-12) + 1e-300
    if q.stable:
        assert q.off_probability == pytest.approx(1 - lam / mu)
