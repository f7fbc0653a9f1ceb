"""
Energy-optimal traffic shaping (EOTS) decisions for one period

For mu_E above lambda_E write rho = lambda_E / mu_E. With the handover power
of the energy queue the closed-form saving gain is

    dP(rho) = zeta_EE lambda_E E - rho kappa - chi (1 - rho)(1 - e^-rho) / rho,

chi = 2 lambda_E C_ho (a shutdown and a reactivation per cycle), so

    d dP / d rho = -kappa + chi f(rho),
    f(rho) = e^-rho (e^rho - 1 - rho + rho^2) / rho^2,

with f strictly decreasing from 3/2 (rho -> 0) to 1 - 1/e (rho = 1). That
fixes the regimes: kappa >= 3/2 chi (= 3 lambda_E C_ho) the gain increases
with mu_E everywhere, kappa <= (1 - 1/e) chi it decreases above lambda_E,
and in between it is concave in rho with its maximum where chi f(rho) = kappa.
The SC is activated only when the best feasible gain is positive.
"""

## modules
import enum
import logging
import math
from typing import Tuple

from recordclass import recordclass
from scipy.optimize import bisect

## local imports
from config.energy import EnergyConfig
from config.network import NetworkConfig, QosSpec
from modelcore import DerivedConstants, TrafficSnapshot, UserClass, derive_constants, \
    expected_user_count
from powermodel import GainForm, operating_point, sc_off_point, total_gain
from shapererrors import DomainError

logger = logging.getLogger(__name__)

F_AT_ZERO = 1.5
F_AT_ONE = 1.0 - math.exp(-1.0)

# a best active gain within this of zero is a tie, and the SC stays off
TIE_W = 1e-12
RHO_GUARD = 1e-9
DEFAULT_TOL = 1e-10

Regime = recordclass("Regime",
                     "tag kappa_w handover_weight_w upper_threshold_w lower_threshold_w")
# handover_weight_w: chi = 2 lambda_E C_ho; thresholds: 3/2 chi and (1 - 1/e) chi

EotsDecision = recordclass(
    "EotsDecision",
    "activate_sc mu_e_per_s operating predicted_gain_w regime policy")
# predicted_gain_w is the closed-form gain; operating carries the pipeline state


class RegimeTag(enum.Enum):
    ENERGY_SUFFICIENT_LINEAR = "EnergySufficientLinear"
    MONOTONE_INCREASING = "MonotoneIncreasing"
    MONOTONE_DECREASING = "MonotoneDecreasing"
    INTERIOR_CONCAVE = "InteriorConcave"


class Policy(enum.Enum):
    EOTS = "eots"
    GREEDY = "greedy"


def handover_shape(rho: float) -> float:
    """
    f(rho) = e^-rho (e^rho - 1 - rho + rho^2) / rho^2, continuous at 0 (f = 3/2)
    """
    if rho < 1e-4:
        # series of the bracket: 3/2 rho^2 + rho^3/6 + rho^4/24
        return math.exp(-rho) * (1.5 + rho / 6.0 + rho * rho / 24.0)
    return math.exp(-rho) * (math.expm1(rho) - rho + rho * rho) / (rho * rho)


def feasible_mu_range(energy: EnergyConfig, net: NetworkConfig, qos: QosSpec,
                      consts: DerivedConstants, traffic: TrafficSnapshot) -> Tuple[float, float]:
    """
    Energy consumption rates with 0 <= w_ss <= W_s and phi <= 1

    mu_min = P_0s / E
    mu_max = (P_0s + min{1, R_th (rho_s pi D_s^2 + 1) / (tau_ss W_s)} beta_s P_Ts) / E
    """
    sc = net.sc
    sc_users = expected_user_count(UserClass.MSU, traffic, net, 0.0)
    load = min(1.0, qos.rate_threshold_bps / (consts.tau_ssu * sc.bandwidth_hz) * (sc_users + 1.0))
    mu_min = sc.static_power_w / energy.unit_joules
    mu_max = (sc.static_power_w + load * sc.amp_inefficiency * sc.tx_power_w) / energy.unit_joules
    return mu_min, mu_max


def classify_regime(kappa_w: float, lambda_e: float, c_ho: float,
                    mu_max: float = None) -> Regime:
    """
    Shape of the gain in mu_E

    Args:
        kappa_w: kappa
        lambda_e: energy arrival rate
        c_ho: handover cost
        mu_max: top of the feasible range. if given and lambda_E >= mu_max,
            the whole range is energy sufficient (linear, no handovers).
    Returns:
        Regime
    """
    if kappa_w < 0 or lambda_e < 0 or c_ho < 0:
        raise DomainError("kappa, lambda_E and C_ho must be >= 0")
    weight = 2.0 * lambda_e * c_ho
    upper = F_AT_ZERO * weight
    lower = F_AT_ONE * weight

    if mu_max is not None and lambda_e >= mu_max:
        tag = RegimeTag.ENERGY_SUFFICIENT_LINEAR
    elif weight == 0 or kappa_w >= upper:
        tag = RegimeTag.MONOTONE_INCREASING
    elif kappa_w <= lower:
        tag = RegimeTag.MONOTONE_DECREASING
    else:
        tag = RegimeTag.INTERIOR_CONCAVE
    return Regime(tag, kappa_w, weight, upper, lower)


def solve_optimal_rho(kappa_w: float, lambda_e: float, c_ho: float,
                      tol: float = DEFAULT_TOL) -> float:
    """
    Utilization maximizing the gain in the concave regime

    Bisection on (eps, 1 - eps) of chi f(rho) - kappa, which is strictly
    decreasing in rho.

    Returns:
        rho* in (0, 1); the optimal rate is lambda_E / rho*
    Throws:
        DomainError unless the regime is InteriorConcave
    """
    regime = classify_regime(kappa_w, lambda_e, c_ho)
    if regime.tag is not RegimeTag.INTERIOR_CONCAVE:
        raise DomainError(f"no interior optimum in regime {regime.tag.value}", regime)
    weight = regime.handover_weight_w

    def stationarity(rho):
        return weight * handover_shape(rho) - kappa_w

    lo, hi = RHO_GUARD, 1.0 - RHO_GUARD
    if stationarity(lo) <= 0:
        return lo
    if stationarity(hi) >= 0:
        return hi
    rho = bisect(stationarity, lo, hi, xtol=1e-15, maxiter=200)

    residual = abs(stationarity(rho))
    if residual > tol * kappa_w:
        logger.warning(f"bisection residual {residual:.3g} above {tol:g} kappa at rho={rho:.12g}")
    return rho


def _candidate_rates(regime: Regime, lambda_e: float, mu_min: float, mu_max: float):
    candidates = {mu_min, mu_max}
    if mu_min < lambda_e < mu_max:
        candidates.add(lambda_e)
    if regime.tag is RegimeTag.INTERIOR_CONCAVE:
        rho = solve_optimal_rho(regime.kappa_w, lambda_e,
                                regime.handover_weight_w / (2.0 * lambda_e))
        candidates.add(min(max(lambda_e / rho, mu_min), mu_max))
    return sorted(candidates)


def eots_decision(traffic: TrafficSnapshot, energy: EnergyConfig, net: NetworkConfig,
                  qos: QosSpec, consts: DerivedConstants = None) -> EotsDecision:
    """
    SC on/off state and energy consumption rate maximizing the saving gain

    Compares the SC switched off with the SC active at each of mu_min,
    mu_max, lambda_E and lambda_E / rho* that lies in the feasible range.

    Throws:
        MacroInfeasibleError if the macro cannot meet QoS even with the SC on
    """
    if consts is None:
        consts = derive_constants(net, qos)
    mu_min, mu_max = feasible_mu_range(energy, net, qos, consts, traffic)
    regime = classify_regime(consts.kappa_w, energy.arrival_rate_per_s,
                             energy.handover_cost_j, mu_max)
    off = sc_off_point(traffic, net, qos, consts)

    best = None
    for mu in _candidate_rates(regime, energy.arrival_rate_per_s, mu_min, mu_max):
        op = operating_point(mu, traffic, energy, net, qos, consts)
        gain = total_gain(mu, energy, consts, traffic, net, qos, GainForm.CLOSED, op)
        logger.debug(f"candidate mu_E={op.mu_e_per_s:.6g}/s gain={gain.total_gain_w:.6g} W")
        if best is None or gain.total_gain_w > best[1].total_gain_w:
            best = (op, gain)

    op, gain = best
    if gain.total_gain_w > TIE_W:
        return EotsDecision(True, op.mu_e_per_s, op, gain.total_gain_w, regime,
                            Policy.EOTS.value)
    return EotsDecision(False, 0.0, off, 0.0, regime, Policy.EOTS.value)


def greedy_decision(traffic: TrafficSnapshot, energy: EnergyConfig, net: NetworkConfig,
                    qos: QosSpec, consts: DerivedConstants = None) -> EotsDecision:
    """
    SC always active at the largest feasible energy consumption rate

    The gain may be negative when handovers cost more than offloading saves.
    """
    if consts is None:
        consts = derive_constants(net, qos)
    mu_min, mu_max = feasible_mu_range(energy, net, qos, consts, traffic)
    regime = classify_regime(consts.kappa_w, energy.arrival_rate_per_s,
                             energy.handover_cost_j, mu_max)
    op = operating_point(mu_max, traffic, energy, net, qos, consts)
    gain = total_gain(mu_max, energy, consts, traffic, net, qos, GainForm.CLOSED, op)
    return EotsDecision(True, op.mu_e_per_s, op, gain.total_gain_w, regime,
                        Policy.GREEDY.value)


def best_active_gain(traffic: TrafficSnapshot, energy: EnergyConfig, net: NetworkConfig,
                     qos: QosSpec, consts: DerivedConstants = None) -> Tuple[float, float, Regime]:
    """
    Largest gain with the SC forced active; may be negative

    Returns:
        (gain_w, mu_e_per_s, regime)
    """
    if consts is None:
        consts = derive_constants(net, qos)
    mu_min, mu_max = feasible_mu_range(energy, net, qos, consts, traffic)
    regime = classify_regime(consts.kappa_w, energy.arrival_rate_per_s,
                             energy.handover_cost_j, mu_max)
    gains = []
    for mu in _candidate_rates(regime, energy.arrival_rate_per_s, mu_min, mu_max):
        op = operating_point(mu, traffic, energy, net, qos, consts)
        report = total_gain(mu, energy, consts, traffic, net, qos, GainForm.CLOSED, op)
        gains.append((report.total_gain_w, op.mu_e_per_s))
    gain, mu = max(gains)
    return gain, mu, regime
