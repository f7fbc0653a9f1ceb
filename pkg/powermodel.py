"""
Base station power accounting and the on-grid power saving gain

The pipeline turns an SC energy consumption rate mu_E into an operating
point (SC bandwidth, offloading probability, macro bandwidths, energy queue
state) and prices it on the macro's power model. The saving gain is
available in two forms:

    pipeline: P_off - P_active evaluated from the operating point
    closed:   harvested-energy conversion form, linear in mu_E up to lambda_E

They differ by one typical MSU's macro RF power scaled by (1 - p_off): the
closed form charges beta_m P_Tm R_th / (W_m tau_ms) that the pipeline does
not. Reports always say which form produced a number.
"""

## modules
import enum
import logging
from typing import Tuple

from recordclass import recordclass

## local imports
from config.energy import EnergyConfig
from config.network import NetworkConfig, QosSpec, SmallCellConfig
from energyqueue import QueueAnalytics, analyze_queue
from modelcore import (DerivedConstants, TrafficSnapshot, UserClass, expected_user_count,
                       required_bandwidth, typical_msu_rf_power)
from shapererrors import DomainError, MacroInfeasibleError, RateInfeasibleError

logger = logging.getLogger(__name__)

# relative slack for float round-off at the bandwidth and rate boundaries
BOUNDARY_RTOL = 1e-12

OperatingPoint = recordclass(
    "OperatingPoint",
    "sc_active mu_e_per_s w_ss_hz offload_fraction offload_fraction_raw "
    "w_mm_hz w_msa_hz w_mso_hz queue")
# w_msa: macro bandwidth for the MSUs; w_mso: extra macro bandwidth taken back
# for the SSUs while the SC sleeps. SC off: phi = 0, w_ss = 0, p_off = 1.

GainReport = recordclass("GainReport",
                         "rf_gain_w total_gain_w p_active_w p_off_w handover_power_w form")
# total_gain_w == p_off_w - p_active_w; form is the GainForm value


class PowerMode(enum.Enum):
    ACTIVE = "active"
    SLEEP = "sleep"


class GainForm(enum.Enum):
    CLOSED = "closed"
    PIPELINE = "pipeline"


# queue state of an SC that is switched off for the whole period
SC_OFF_QUEUE = QueueAnalytics(0.0, 1.0, 0.0, 0.0, 0.0, True, 0.0)


def bs_power(static_w: float, amp_inefficiency: float, tx_power_w: float,
             utilized_bw_hz: float, total_bw_hz: float,
             mode: PowerMode = PowerMode.ACTIVE) -> float:
    """
    Load-proportional BS power: P_0 + (w / W) beta P_T when active, 0 asleep

    Throws:
        DomainError if the utilized bandwidth is negative or exceeds the total
    """
    if not 0 <= utilized_bw_hz <= total_bw_hz * (1 + BOUNDARY_RTOL):
        raise DomainError(f"utilized bandwidth {utilized_bw_hz:g} Hz outside "
                          f"[0, {total_bw_hz:g}] Hz")
    if PowerMode(mode) is PowerMode.SLEEP:
        return 0.0
    return static_w + utilized_bw_hz / total_bw_hz * amp_inefficiency * tx_power_w


def sc_bandwidth_from_rate(mu_e_per_s: float, energy: EnergyConfig,
                           sc: SmallCellConfig) -> float:
    """
    Small cell bandwidth drawn at energy consumption rate mu_E

    Exact inversion of mu_E E = P_0s + (w_ss / W_s) beta_s P_Ts. The result
    may exceed W_s; callers keep mu_E inside the feasible range.

    Throws:
        RateInfeasibleError if mu_E E < P_0s
    """
    surplus = mu_e_per_s * energy.unit_joules - sc.static_power_w
    if surplus < 0:
        if surplus >= -BOUNDARY_RTOL * sc.static_power_w:
            return 0.0
        raise RateInfeasibleError(mu_e_per_s, sc.static_power_w / energy.unit_joules)
    return sc.bandwidth_hz * surplus / (sc.amp_inefficiency * sc.tx_power_w)


def sc_rate_from_bandwidth(w_ss_hz: float, energy: EnergyConfig, sc: SmallCellConfig) -> float:
    """
    Energy consumption rate mu_E of the SC using w_ss
    """
    return (sc.static_power_w
            + w_ss_hz / sc.bandwidth_hz * sc.amp_inefficiency * sc.tx_power_w) / energy.unit_joules


def offload_fraction(w_ss_hz: float, traffic: TrafficSnapshot, qos: QosSpec,
                     consts: DerivedConstants, net: NetworkConfig) -> Tuple[float, float]:
    """
    Largest offloading probability the SC bandwidth supports at the outage target

    phi_raw = (tau_ss w_ss / R_th - 1) / (rho_s pi D_s^2), clamped to [0, 1].
    With no SC users (rho_s = 0) phi is 1 when w_ss serves a typical user
    and 0 otherwise.

    Returns:
        (phi, phi_raw)
    """
    if w_ss_hz < 0:
        raise DomainError(f"SC bandwidth {w_ss_hz:g} Hz < 0")
    served = consts.tau_ssu * w_ss_hz / qos.rate_threshold_bps
    sc_users = expected_user_count(UserClass.MSU, traffic, net, 0.0)
    if sc_users == 0:
        phi = 1.0 if served >= 1.0 else 0.0
        return phi, phi
    raw = (served - 1.0) / sc_users
    return min(max(raw, 0.0), 1.0), raw


def macro_bandwidths(phi: float, traffic: TrafficSnapshot, qos: QosSpec,
                     consts: DerivedConstants, net: NetworkConfig) -> Tuple[float, float, float]:
    """
    Macro bandwidth for MMUs, for MSUs, and for SSUs while the SC sleeps

    Returns:
        (w_mm, w_msa, w_mso) in Hz
    Throws:
        MacroInfeasibleError if w_mm + w_msa + w_mso > W_m
    """
    if not 0.0 <= phi <= 1.0:
        raise DomainError(f"offload fraction {phi} outside [0, 1]")
    w_mm = required_bandwidth(UserClass.MMU,
                              expected_user_count(UserClass.MMU, traffic, net), qos, consts)
    w_msa = required_bandwidth(UserClass.MSU,
                               expected_user_count(UserClass.MSU, traffic, net, phi), qos, consts)
    # the SSUs fall back to the macro at MSU spectral efficiency
    w_mso = required_bandwidth(UserClass.MSU,
                               expected_user_count(UserClass.SSU, traffic, net, phi), qos, consts)
    required = w_mm + w_msa + w_mso
    if required > net.macro.bandwidth_hz * (1 + BOUNDARY_RTOL):
        raise MacroInfeasibleError(required, net.macro.bandwidth_hz, traffic)
    return w_mm, w_msa, w_mso


def operating_point(mu_e_per_s: float, traffic: TrafficSnapshot, energy: EnergyConfig,
                    net: NetworkConfig, qos: QosSpec, consts: DerivedConstants) -> OperatingPoint:
    """
    Full state of an active SC consuming energy at mu_E

    When the SC bandwidth would serve more than every SC user (phi_raw > 1),
    phi is clamped to 1 and w_ss, mu_E are lowered to the minimum serving
    all of them, so no harvested energy is spent on idle bandwidth.

    Throws:
        RateInfeasibleError if mu_E E < P_0s
        DomainError if w_ss would exceed W_s
        MacroInfeasibleError if the macro cannot meet QoS
    """
    sc = net.sc
    w_ss = sc_bandwidth_from_rate(mu_e_per_s, energy, sc)
    if w_ss > sc.bandwidth_hz * (1 + BOUNDARY_RTOL):
        raise DomainError(f"mu_E = {mu_e_per_s:g}/s needs {w_ss / 1e6:.4g} MHz, more than "
                          f"W_s = {sc.bandwidth_hz / 1e6:.4g} MHz")
    w_ss = min(w_ss, sc.bandwidth_hz)

    phi, phi_raw = offload_fraction(w_ss, traffic, qos, consts, net)
    if phi_raw > 1.0:
        sc_users = expected_user_count(UserClass.MSU, traffic, net, 0.0)
        w_ss = required_bandwidth(UserClass.SSU, sc_users, qos, consts)
        mu_clamped = sc_rate_from_bandwidth(w_ss, energy, sc)
        logger.debug(f"phi clamped from {phi_raw:.4g} to 1; mu_E lowered "
                     f"{mu_e_per_s:.6g} -> {mu_clamped:.6g}/s")
        mu_e_per_s = mu_clamped

    queue = analyze_queue(energy, mu_e_per_s)
    w_mm, w_msa, w_mso = macro_bandwidths(phi, traffic, qos, consts, net)
    return OperatingPoint(True, mu_e_per_s, w_ss, phi, phi_raw, w_mm, w_msa, w_mso, queue)


def sc_off_point(traffic: TrafficSnapshot, net: NetworkConfig, qos: QosSpec,
                 consts: DerivedConstants) -> OperatingPoint:
    """
    Operating point with the SC switched off for the whole period
    """
    w_mm, w_msa, w_mso = macro_bandwidths(0.0, traffic, qos, consts, net)
    return OperatingPoint(False, 0.0, 0.0, 0.0, 0.0, w_mm, w_msa, w_mso, SC_OFF_QUEUE)


def macro_power(net: NetworkConfig, utilized_bw_hz: float) -> float:
    """
    Power of the active macro using utilized_bw_hz of W_m
    """
    macro = net.macro
    return bs_power(macro.static_power_w, macro.amp_inefficiency, macro.tx_power_w,
                    utilized_bw_hz, macro.bandwidth_hz, PowerMode.ACTIVE)


def ongrid_power_active(op: OperatingPoint, net: NetworkConfig) -> float:
    """
    Mean on-grid power with the SC in use:

        P_0m + beta_m (P_Tm / W_m)(w_mm + w_msa + p_off w_mso) + P_ho
    """
    q = op.queue
    bandwidth = op.w_mm_hz + op.w_msa_hz + q.off_probability * op.w_mso_hz
    return macro_power(net, bandwidth) + q.handover_power_w


def ongrid_power_sc_off(traffic: TrafficSnapshot, net: NetworkConfig, qos: QosSpec,
                        consts: DerivedConstants) -> float:
    """
    On-grid power with the SC switched off: the macro serves everyone
    """
    w_mm, w_msa, w_mso = macro_bandwidths(0.0, traffic, qos, consts, net)
    return macro_power(net, w_mm + w_msa + w_mso)


def rf_gain_closed_form(mu_e_per_s: float, energy: EnergyConfig,
                        consts: DerivedConstants) -> float:
    """
    Macro RF power saved by the SC, piecewise in mu_E:

        mu_E <= lambda_E:  zeta_EE mu_E E - kappa
        mu_E >  lambda_E:  zeta_EE lambda_E E - (lambda_E / mu_E) kappa
    """
    if not mu_e_per_s > 0:
        raise DomainError(f"energy consumption rate must be > 0, got {mu_e_per_s}")
    lam, unit = energy.arrival_rate_per_s, energy.unit_joules
    if mu_e_per_s <= lam:
        return consts.zeta_ee * mu_e_per_s * unit - consts.kappa_w
    return consts.zeta_ee * lam * unit - lam / mu_e_per_s * consts.kappa_w


def total_gain(mu_e_per_s: float, energy: EnergyConfig, consts: DerivedConstants,
               traffic: TrafficSnapshot, net: NetworkConfig, qos: QosSpec,
               form: GainForm = GainForm.CLOSED, op: OperatingPoint = None) -> GainReport:
    """
    On-grid power saving gain of running the SC at mu_E, net of handovers

    Args:
        form: GainForm.CLOSED or GainForm.PIPELINE
        op: the operating point for mu_E if already built
    Returns:
        GainReport with total_gain_w = p_off_w - p_active_w
    Throws:
        RateInfeasibleError, DomainError, MacroInfeasibleError as
        operating_point does
    """
    form = GainForm(form)
    if op is None:
        op = operating_point(mu_e_per_s, traffic, energy, net, qos, consts)
    p_off = ongrid_power_sc_off(traffic, net, qos, consts)
    p_ho = op.queue.handover_power_w

    if traffic.sc_density == 0:
        # nothing to offload: activating the SC can only cost handovers
        rf = 0.0
        total = -p_ho
        p_active = p_off - total
    elif form is GainForm.PIPELINE:
        p_active = ongrid_power_active(op, net)
        total = p_off - p_active
        rf = total + p_ho
    else:
        rf = rf_gain_closed_form(op.mu_e_per_s, energy, consts)
        total = rf - p_ho
        p_active = p_off - total
    return GainReport(rf, total, p_active, p_off, p_ho, form.value)


def gain_form_offset(op: OperatingPoint, net: NetworkConfig, qos: QosSpec,
                     consts: DerivedConstants) -> float:
    """
    Pipeline minus closed-form gain on the unclamped interior:
    (1 - p_off) beta_m P_Tm R_th / (W_m tau_ms)
    """
    return (1.0 - op.queue.off_probability) * typical_msu_rf_power(net, qos, consts.tau_msu)
