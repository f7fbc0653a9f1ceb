"""
Spectral efficiencies and outage-constrained bandwidth for the traffic shaper

Converts the per-user QoS target (rate R_th met with probability 1 - eta)
into the bandwidth each tier must spend on each user class. All functions
are pure; records are never mutated after construction.

The edge efficiency uses a single bandwidth factor,

    tau = log2(1 + eta P_T (alpha + 2) / (2 (theta + 1) sigma^2 W D^alpha)),

re-derived from the final line of the outage integral (set G = eta and
linearize 2^(R/w) - 1). The printed small-cell and macro-edge formulas
divide by W twice; the Monte Carlo estimator in simkit agrees with the
single-factor form.
"""

## modules
import enum
import logging
import math
from typing import Any

import numpy as np
from recordclass import recordclass

## local imports
from config.network import NetworkConfig, QosSpec
from shapererrors import ConfigurationInfeasibleError, DomainError

logger = logging.getLogger(__name__)

M2_PER_KM2 = 1e6

TrafficSnapshot = recordclass("TrafficSnapshot", "macro_density sc_density")
# user densities in users/m^2 outside (rho_m) and inside (rho_s) the SC disc,
# constant over one period

DerivedConstants = recordclass("DerivedConstants",
                               "tau_ssu tau_msu tau_mmu zeta_ee kappa_w")
# tau_*: bps/Hz; zeta_ee: harvested-energy-to-grid-power conversion rate;
# kappa_w: zeta_ee P_0s + beta_m P_Tm R_th / (W_m tau_ms)


class Tier(enum.Enum):
    SMALL_CELL = "small-cell"
    MACRO_EDGE = "macro-edge"


class UserClass(enum.Enum):
    SSU = "SSU"  # offloaded to the small cell
    MSU = "MSU"  # inside the small cell disc, served by the macro
    MMU = "MMU"  # outside the small cell disc, served by the macro


def snapshot(macro_density: float, sc_density: float) -> TrafficSnapshot:
    """
    Checked TrafficSnapshot from densities in users/m^2
    """
    if not (macro_density >= 0 and sc_density >= 0):
        raise DomainError(f"user densities must be >= 0, got rho_m={macro_density}, "
                          f"rho_s={sc_density}")
    return TrafficSnapshot(float(macro_density), float(sc_density))


def snapshot_per_km2(rho_m_per_km2: float, rho_s_per_km2: float) -> TrafficSnapshot:
    return snapshot(rho_m_per_km2 / M2_PER_KM2, rho_s_per_km2 / M2_PER_KM2)


def _efficiency(snr_arg: float, what: str) -> float:
    with np.errstate(all="ignore"):
        tau = float(np.log2(1.0 + snr_arg))
    if not math.isfinite(tau) or tau <= 0:
        raise ConfigurationInfeasibleError(f"{what} spectral efficiency is {tau!r}; "
                                           f"the configuration cannot meet the outage target")
    return tau


def edge_spectral_efficiency(tier: Tier, net: NetworkConfig, qos: QosSpec) -> float:
    """
    Spectral efficiency (bps/Hz) of a typical user of an edge-limited tier

    Args:
        tier: Tier.SMALL_CELL for SSUs (radius D_s), Tier.MACRO_EDGE for MMUs
            (radius D_m)
        net: both tiers' radio parameters
        qos: rate threshold, outage target and noise density
    Returns:
        tau_ss or tau_mm
    Throws:
        ConfigurationInfeasibleError if tau is not finite and positive
    """
    cell = net.sc if Tier(tier) is Tier.SMALL_CELL else net.macro
    alpha = cell.pathloss_exp
    arg = (qos.outage_target * cell.tx_power_w * (alpha + 2)
           / (2 * (cell.interference_factor + 1) * qos.noise_density_w_per_hz
              * cell.bandwidth_hz * cell.coverage_radius_m ** alpha))
    return _efficiency(arg, Tier(tier).value)


def msu_spectral_efficiency(net: NetworkConfig, qos: QosSpec) -> float:
    """
    Spectral efficiency of MSUs, all placed at the small cell site (D_ms)
    """
    macro = net.macro
    if net.sc.macro_sc_distance_m <= 0:
        raise DomainError("macro_sc_distance_m must be > 0")
    arg = (qos.outage_target * macro.tx_power_w
           / (qos.noise_density_w_per_hz * macro.bandwidth_hz
              * (macro.interference_factor + 1)
              * net.sc.macro_sc_distance_m ** macro.pathloss_exp))
    return _efficiency(arg, "MSU")


def effective_mmu_density(traffic: TrafficSnapshot, net: NetworkConfig) -> float:
    """
    MMU density spread over the whole macro disc: rho_m (D_m^2 - D_s^2) / D_m^2
    """
    d_m = net.macro.coverage_radius_m
    d_s = net.sc.coverage_radius_m
    return traffic.macro_density * (d_m ** 2 - d_s ** 2) / d_m ** 2


def expected_user_count(user_class: UserClass, traffic: TrafficSnapshot,
                        net: NetworkConfig, offload_fraction: float = 0.0) -> float:
    """
    Mean number of users of a class (also the Poisson mean of a typical
    user's peers)

    SSU: phi rho_s pi D_s^2; MSU: (1 - phi) rho_s pi D_s^2; MMU: pi D_m^2 rho'_m
    """
    if not 0.0 <= offload_fraction <= 1.0:
        raise DomainError(f"offload fraction {offload_fraction} outside [0, 1]")
    sc_users = traffic.sc_density * math.pi * net.sc.coverage_radius_m ** 2
    user_class = UserClass(user_class)
    if user_class is UserClass.SSU:
        return offload_fraction * sc_users
    if user_class is UserClass.MSU:
        return (1.0 - offload_fraction) * sc_users
    return math.pi * net.macro.coverage_radius_m ** 2 * effective_mmu_density(traffic, net)


def class_efficiency(user_class: UserClass, consts: DerivedConstants) -> float:
    return {UserClass.SSU: consts.tau_ssu,
            UserClass.MSU: consts.tau_msu,
            UserClass.MMU: consts.tau_mmu}[UserClass(user_class)]


def required_bandwidth(user_class: UserClass, expected_user_count: float,
                       qos: QosSpec, consts: DerivedConstants) -> float:
    """
    Minimum bandwidth (Hz) meeting a class's outage constraint with equality

    w = (R_th / tau_class) (1 + expected_user_count). Whether the result fits
    in the tier's bandwidth is for the caller to check.
    """
    if expected_user_count < 0:
        raise DomainError(f"expected user count {expected_user_count} < 0")
    return qos.rate_threshold_bps / class_efficiency(user_class, consts) * (1.0 + expected_user_count)


def derive_constants(net: NetworkConfig, qos: QosSpec) -> DerivedConstants:
    """
    tau_ss, tau_ms, tau_mm, zeta_EE and kappa for one configuration
    """
    tau_ss = edge_spectral_efficiency(Tier.SMALL_CELL, net, qos)
    tau_ms = msu_spectral_efficiency(net, qos)
    tau_mm = edge_spectral_efficiency(Tier.MACRO_EDGE, net, qos)
    macro, sc = net.macro, net.sc
    zeta = (sc.bandwidth_hz * tau_ss * macro.amp_inefficiency * macro.tx_power_w
            / (macro.bandwidth_hz * tau_ms * sc.amp_inefficiency * sc.tx_power_w))
    kappa = zeta * sc.static_power_w + typical_msu_rf_power(net, qos, tau_ms)
    logger.debug(f"tau_ss={tau_ss:.6g} tau_ms={tau_ms:.6g} tau_mm={tau_mm:.6g} "
                 f"zeta_ee={zeta:.6g} kappa={kappa:.6g} W")
    return DerivedConstants(tau_ss, tau_ms, tau_mm, zeta, kappa)


def typical_msu_rf_power(net: NetworkConfig, qos: QosSpec, tau_ms: float) -> float:
    """
    Macro RF power spent on one typical MSU's bandwidth: beta_m P_Tm R_th / (W_m tau_ms)
    """
    macro = net.macro
    return macro.amp_inefficiency * macro.tx_power_w * qos.rate_threshold_bps \
        / (macro.bandwidth_hz * tau_ms)


def outage_scale(user_class: UserClass, net: NetworkConfig, qos: QosSpec) -> float:
    """
    Coefficient b of the high-SNR outage, G = b E[2^((K+1) R / w) - 1]
    """
    user_class = UserClass(user_class)
    noise = qos.noise_density_w_per_hz
    if user_class is UserClass.MSU:
        macro = net.macro
        return ((macro.interference_factor + 1) * noise * macro.bandwidth_hz
                * net.sc.macro_sc_distance_m ** macro.pathloss_exp / macro.tx_power_w)
    cell = net.sc if user_class is UserClass.SSU else net.macro
    alpha = cell.pathloss_exp
    return (2 * (cell.interference_factor + 1) * noise * cell.bandwidth_hz
            * cell.coverage_radius_m ** alpha / (cell.tx_power_w * (alpha + 2)))


def closed_form_outage(user_class: UserClass, net: NetworkConfig, qos: QosSpec,
                       traffic: TrafficSnapshot, offload_fraction: float,
                       allocated_bw_hz: float) -> float:
    """
    Analytic outage of a typical user before the sufficient-bandwidth step

        G = b (2^(R/w) exp(N (2^(R/w) - 1)) - 1),

    N the class's mean peer count; clipped to [0, 1].
    """
    if allocated_bw_hz <= 0:
        raise DomainError(f"allocated bandwidth {allocated_bw_hz} must be > 0")
    peers = expected_user_count(user_class, traffic, net, offload_fraction)
    with np.errstate(over="ignore", invalid="ignore"):
        growth = np.exp2(qos.rate_threshold_bps / allocated_bw_hz)
        g = outage_scale(user_class, net, qos) * (growth * np.exp(peers * (growth - 1.0)) - 1.0)
    if np.isnan(g):
        # 0 peers times an overflowed growth
        return 1.0
    return float(np.clip(g, 0.0, 1.0))


def to_dict(record: Any) -> Any:
    """
    JSON-ready view of a record, recursing into nested records and enums
    """
    if hasattr(record, "_asdict"):
        return {k: to_dict(v) for k, v in record._asdict().items()}
    if isinstance(record, enum.Enum):
        return record.value
    if isinstance(record, (list, tuple)):
        return [to_dict(v) for v in record]
    if isinstance(record, (np.floating, np.integer, np.bool_)):
        return record.item()
    return record
