import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eots import (F_AT_ONE, F_AT_ZERO, RegimeTag, best_active_gain, classify_regime,
                  eots_decision, feasible_mu_range, greedy_decision, handover_shape,
                  solve_optimal_rho)
from powermodel import total_gain
from shapererrors import DomainError
from conftest import make_energy

KAPPA = 117.540
ZETA = 2.07408


def closed_gain_in_rho(rho, kappa_w, lambda_e, c_ho, zeta_ee, unit_joules):
    # dP(rho) above lambda_E; vectorized over rho in (0, 1]
    rho = np.asarray(rho, dtype=float)
    cycle = (1.0 - rho) * -np.expm1(-rho) / rho
    return zeta_ee * lambda_e * unit_joules - rho * kappa_w - 2.0 * lambda_e * c_ho * cycle


def test_handover_shape_limits():
    assert handover_shape(0.0) == F_AT_ZERO
    assert handover_shape(1.0) == pytest.approx(F_AT_ONE, rel=1e-12)
    # the series and the direct form meet at the switch-over
    assert handover_shape(0.99e-4) == pytest.approx(handover_shape(1.01e-4), rel=1e-5)
    assert handover_shape(0.9) == pytest.approx(0.68746, abs=1e-5)
    rhos = np.linspace(0.0, 1.0, 201)
    assert np.all(np.diff([handover_shape(r) for r in rhos]) < 0)


def test_regime_examples():
    lam = 50.0
    # chi == kappa: f(rho*) = 1
    c_ho = KAPPA / (2 * lam)
    assert classify_regime(KAPPA, lam, c_ho).tag is RegimeTag.INTERIOR_CONCAVE
    assert solve_optimal_rho(KAPPA, lam, c_ho) == pytest.approx(0.4617, abs=1e-3)

    c_ho = KAPPA / (0.5 * lam)
    assert classify_regime(KAPPA, lam, c_ho).tag is RegimeTag.MONOTONE_DECREASING
    assert classify_regime(KAPPA, lam, 0.0).tag is RegimeTag.MONOTONE_INCREASING
    assert classify_regime(KAPPA, 0.0, 5.0).tag is RegimeTag.MONOTONE_INCREASING
    assert classify_regime(KAPPA, 80.0, 5.0, mu_max=68.0).tag is \
        RegimeTag.ENERGY_SUFFICIENT_LINEAR


def test_regime_thresholds():
    regime = classify_regime(KAPPA, 10.0, 2.0)
    assert regime.handover_weight_w == 40.0
    assert regime.upper_threshold_w == pytest.approx(60.0)
    assert regime.lower_threshold_w == pytest.approx(40.0 * (1 - math.exp(-1)))
    with pytest.raises(DomainError):
        classify_regime(-1.0, 10.0, 2.0)


def test_optimal_rho_limits():
    lam = 40.0
    near_upper = KAPPA / (2 * lam * F_AT_ZERO) * (1 + 1e-3)
    assert solve_optimal_rho(KAPPA, lam, near_upper) < 0.01
    near_lower = KAPPA / (2 * lam * F_AT_ONE) * (1 - 1e-3)
    assert solve_optimal_rho(KAPPA, lam, near_lower) > 0.95


@settings(max_examples=50, deadline=None)
@given(scale=st.floats(0.01, 100.0))
def test_optimal_rho_is_scale_invariant(scale):
    lam = 50.0
    c_ho = KAPPA / (2 * lam)
    base = solve_optimal_rho(KAPPA, lam, c_ho)
    assert solve_optimal_rho(scale * KAPPA, lam, scale * c_ho) == pytest.approx(base, abs=1e-9)


def test_no_interior_optimum_outside_concave_regime():
    with pytest.raises(DomainError):
        solve_optimal_rho(KAPPA, 40.0, 0.0)
    with pytest.raises(DomainError):
        solve_optimal_rho(KAPPA, 40.0, KAPPA / 20.0)


@settings(max_examples=100, deadline=None)
@given(kappa=st.floats(1.0, 500.0), lam=st.floats(0.1, 200.0), c_ho=st.floats(0.0, 20.0))
def test_regime_matches_gain_shape(kappa, lam, c_ho):
    regime = classify_regime(kappa, lam, c_ho)
    rhos = np.linspace(1e-3, 1.0, 400)
    gains = closed_gain_in_rho(rhos, kappa, lam, c_ho, ZETA, 1.0)
    slack = 1e-9 * (1.0 + np.max(np.abs(gains)))
    steps = np.diff(gains)
    if regime.tag is RegimeTag.MONOTONE_INCREASING:
        # increasing in mu_E is decreasing in rho
        assert np.all(steps <= slack)
    elif regime.tag is RegimeTag.MONOTONE_DECREASING:
        assert np.all(steps >= -slack)
    else:
        rho_star = solve_optimal_rho(kappa, lam, c_ho)
        best = closed_gain_in_rho(rho_star, kappa, lam, c_ho, ZETA, 1.0)
        assert np.all(gains <= best + slack)


@settings(max_examples=100, deadline=None)
@given(kappa=st.floats(1.0, 500.0), lam=st.floats(0.1, 200.0), c_ho=st.floats(0.01, 20.0))
def test_gain_is_concave_in_rho(kappa, lam, c_ho):
    rhos = np.linspace(1e-3, 1.0, 200)
    gains = closed_gain_in_rho(rhos, kappa, lam, c_ho, ZETA, 1.0)
    curvature = np.diff(gains, 2)
    assert np.all(curvature <= 1e-9 * (1.0 + np.max(np.abs(gains))))


def test_feasible_range(net, qos, consts, traffic):
    mu_min, mu_max = feasible_mu_range(make_energy(), net, qos, consts, traffic)
    assert mu_min == 56.0
    assert mu_max == pytest.approx(68.05, abs=0.01)
    half = feasible_mu_range(make_energy(e_j=2.0), net, qos, consts, traffic)
    assert half == pytest.approx((mu_min / 2, mu_max / 2))


def test_interior_optimum_beats_the_grid(net, qos, consts, traffic):
    lam = 60.0
    c_ho = consts.kappa_w / (2 * lam * handover_shape(0.9))
    energy = make_energy(lam, c_ho)
    decision = eots_decision(traffic, energy, net, qos, consts)
    assert decision.regime.tag is RegimeTag.INTERIOR_CONCAVE
    assert decision.activate_sc
    assert decision.mu_e_per_s == pytest.approx(lam / 0.9, rel=1e-6)
    assert decision.predicted_gain_w == pytest.approx(7.39, abs=0.01)

    mu_min, mu_max = feasible_mu_range(energy, net, qos, consts, traffic)
    grid = [total_gain(mu, energy, consts, traffic, net, qos).total_gain_w
            for mu in np.linspace(mu_min, mu_max, 501)]
    assert decision.predicted_gain_w >= max(grid) - 1e-9


def test_no_harvest_keeps_sc_off(net, qos, consts, traffic):
    decision = eots_decision(traffic, make_energy(0.0, c_ho=1.0), net, qos, consts)
    assert not decision.activate_sc
    assert decision.predicted_gain_w == 0.0
    assert decision.mu_e_per_s == 0.0
    assert decision.operating.queue.off_probability == 1.0


def test_free_handovers_match_greedy(net, qos, consts, traffic):
    energy = make_energy(50.0, c_ho=0.0)
    eots = eots_decision(traffic, energy, net, qos, consts)
    greedy = greedy_decision(traffic, energy, net, qos, consts)
    _, mu_max = feasible_mu_range(energy, net, qos, consts, traffic)
    assert eots.activate_sc
    assert eots.mu_e_per_s == pytest.approx(mu_max, rel=1e-12)
    assert eots.predicted_gain_w == pytest.approx(greedy.predicted_gain_w, rel=1e-12)
    assert eots.policy == "eots" and greedy.policy == "greedy"


def test_greedy_loses_to_costly_handovers(net, qos, consts, traffic):
    energy = make_energy(10.0, c_ho=5.0)
    greedy = greedy_decision(traffic, energy, net, qos, consts)
    assert greedy.activate_sc
    assert greedy.predicted_gain_w == pytest.approx(-75.9, abs=0.2)
    eots = eots_decision(traffic, energy, net, qos, consts)
    assert not eots.activate_sc
    assert eots.predicted_gain_w == 0.0
    gain, _, _ = best_active_gain(traffic, energy, net, qos, consts)
    assert gain < 0


def test_energy_sufficient_period(net, qos, consts, traffic):
    energy = make_energy(80.0, c_ho=5.0)
    eots = eots_decision(traffic, energy, net, qos, consts)
    greedy = greedy_decision(traffic, energy, net, qos, consts)
    assert eots.regime.tag is RegimeTag.ENERGY_SUFFICIENT_LINEAR
    assert eots.mu_e_per_s == pytest.approx(greedy.mu_e_per_s, rel=1e-12)
    assert eots.predicted_gain_w == pytest.approx(greedy.predicted_gain_w, rel=1e-12)
    assert eots.predicted_gain_w == pytest.approx(ZETA * greedy.mu_e_per_s - KAPPA, rel=1e-3)
    assert eots.operating.queue.handover_power_w == 0.0


def test_eots_never_below_greedy_or_zero(net, qos, consts, traffic):
    for lam in (0.0, 5.0, 30.0, 57.0, 62.0, 75.0):
        for c_ho in (0.0, 0.5, 2.0, 10.0):
            energy = make_energy(lam, c_ho)
            eots = eots_decision(traffic, energy, net, qos, consts)
            greedy = greedy_decision(traffic, energy, net, qos, consts)
            assert eots.predicted_gain_w >= 0.0
            assert eots.predicted_gain_w >= greedy.predicted_gain_w - 1e-9
