import math

import pytest

from modelcore import (M2_PER_KM2, Tier, UserClass, closed_form_outage, derive_constants,
                       edge_spectral_efficiency, effective_mmu_density, expected_user_count,
                       msu_spectral_efficiency, required_bandwidth, snapshot, snapshot_per_km2,
                       to_dict)
from shapererrors import ConfigurationInfeasibleError, DomainError, EXIT_INFEASIBLE


def test_table1_constants(consts):
    assert consts.tau_ssu == pytest.approx(0.24412, rel=1e-4)
    assert consts.tau_msu == pytest.approx(0.68, abs=0.01)
    assert consts.tau_msu == pytest.approx(0.67545, rel=1e-4)
    assert consts.tau_mmu == pytest.approx(0.35019, rel=1e-4)
    assert consts.zeta_ee == pytest.approx(2.0741, rel=1e-4)
    assert consts.kappa_w == pytest.approx(117.54, rel=1e-4)


def test_edge_efficiency_matches_derived(net, qos, consts):
    assert edge_spectral_efficiency(Tier.SMALL_CELL, net, qos) == consts.tau_ssu
    assert edge_spectral_efficiency("macro-edge", net, qos) == consts.tau_mmu
    assert msu_spectral_efficiency(net, qos) == consts.tau_msu


def test_efficiency_vanishes_with_outage_target(net, qos):
    tight = qos.with_(outage_target=1e-9)
    assert edge_spectral_efficiency(Tier.SMALL_CELL, net, tight) < 1e-7
    assert msu_spectral_efficiency(net, tight) < 1e-7


def test_infeasible_efficiency(net, qos):
    # a tiny positive tau underflows to zero once the noise is huge
    deaf = qos.with_(noise_density_w_per_hz=1e300)
    with pytest.raises(ConfigurationInfeasibleError) as e:
        derive_constants(net, deaf)
    assert e.value.error_code == EXIT_INFEASIBLE


def test_effective_mmu_density(net):
    traffic = snapshot_per_km2(20.0, 0.0)
    assert effective_mmu_density(traffic, net) * M2_PER_KM2 == pytest.approx(18.2)

    pinhole = net.with_(sc={"coverage_radius_m": 1e-9})
    assert effective_mmu_density(traffic, pinhole) == pytest.approx(traffic.macro_density)

    # D_s -> D_m while the SC still fits inside the macro disc
    centred = net.with_(sc={"coverage_radius_m": 999.99, "macro_sc_distance_m": 1e-3})
    assert effective_mmu_density(traffic, centred) == pytest.approx(0.0, abs=1e-9)


def test_expected_user_counts(net):
    traffic = snapshot_per_km2(20.0, 60.0)
    sc_users = 60e-6 * math.pi * 300 ** 2
    assert sc_users == pytest.approx(16.965, rel=1e-4)
    assert expected_user_count(UserClass.SSU, traffic, net, 0.25) == pytest.approx(0.25 * sc_users)
    assert expected_user_count(UserClass.MSU, traffic, net, 0.25) == pytest.approx(0.75 * sc_users)
    assert expected_user_count(UserClass.MMU, traffic, net) == pytest.approx(
        math.pi * 1000 ** 2 * 18.2e-6)
    with pytest.raises(DomainError):
        expected_user_count(UserClass.SSU, traffic, net, 1.5)


def test_required_bandwidth(net, qos, consts):
    for user_class, tau in ((UserClass.SSU, consts.tau_ssu), (UserClass.MSU, consts.tau_msu),
                            (UserClass.MMU, consts.tau_mmu)):
        assert required_bandwidth(user_class, 0.0, qos, consts) == pytest.approx(100e3 / tau)

    traffic = snapshot_per_km2(0.0, 60.0)
    count = expected_user_count(UserClass.MSU, traffic, net, 0.0)
    assert required_bandwidth(UserClass.MSU, count, qos, consts) == pytest.approx(
        100e3 / consts.tau_msu * (1 + 16.965), rel=1e-4)
    with pytest.raises(DomainError):
        required_bandwidth(UserClass.MSU, -1.0, qos, consts)


def test_snapshot_rejects_negative_density():
    with pytest.raises(DomainError):
        snapshot(-1e-6, 0.0)
    assert snapshot_per_km2(5.0, 60.0) == snapshot(5e-6, 60e-6)


def test_closed_form_outage_hits_target_at_equality(net, qos, consts):
    traffic = snapshot_per_km2(20.0, 60.0)
    for user_class, phi in ((UserClass.SSU, 0.5), (UserClass.SSU, 1.0), (UserClass.MMU, 0.0)):
        count = expected_user_count(user_class, traffic, net, phi)
        w = required_bandwidth(user_class, count, qos, consts)
        assert closed_form_outage(user_class, net, qos, traffic, phi, w) == pytest.approx(
            qos.outage_target, abs=0.002)


def test_closed_form_outage_limits(net, qos):
    traffic = snapshot_per_km2(20.0, 60.0)
    assert closed_form_outage(UserClass.MSU, net, qos, traffic, 0.0, 1e15) < 1e-6
    assert closed_form_outage(UserClass.MSU, net, qos, traffic, 0.0, 1.0) == 1.0
    with pytest.raises(DomainError):
        closed_form_outage(UserClass.MSU, net, qos, traffic, 0.0, 0.0)


def test_to_dict(consts):
    as_dict = to_dict(consts)
    assert list(as_dict) == ["tau_ssu", "tau_msu", "tau_mmu", "zeta_ee", "kappa_w"]
    assert to_dict([Tier.SMALL_CELL, consts])[0] == "small-cell"
