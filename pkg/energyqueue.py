"""
M/D/1 analytics of the small cell's harvest-and-consume energy buffer

Energy units of E joules arrive as a Poisson process with rate lambda_E and
are consumed one per deterministic interval 1/mu_E while the SC is active.
When the buffer empties the SC sleeps until the next arrival, and each
shutdown and each reactivation costs one handover (C_ho joules).
"""

## modules
import logging
import math

from recordclass import recordclass

## local imports
from config.energy import EnergyConfig
from shapererrors import DomainError

logger = logging.getLogger(__name__)

QueueAnalytics = recordclass(
    "QueueAnalytics",
    "utilization off_probability p_one shutdown_rate_per_s handover_power_w stable "
    "cycle_rate_per_s")
# utilization: lambda_E / mu_E
# off_probability: stationary P{buffer empty}, the SC's forced-sleep fraction
# p_one: stationary P{exactly one unit in the buffer}
# shutdown_rate_per_s: p_one mu_E e^-rho, the model's 1 -> 0 transition rate
# handover_power_w: 2 C_ho shutdown_rate_per_s
# stable: False when lambda_E >= mu_E (energy sufficient, SC always on)
# cycle_rate_per_s: exact busy-period rate lambda_E p_off of an M/D/1 queue;
#     the closed-form shutdown rate is always below it since 1 - e^-rho < rho


def analyze_queue(energy: EnergyConfig, service_rate_per_s: float) -> QueueAnalytics:
    """
    Stationary statistics of the energy queue at consumption rate mu_E

    Args:
        energy: arrival rate, unit size and handover cost
        service_rate_per_s: mu_E, energy units consumed per second while active
    Returns:
        QueueAnalytics. If lambda_E >= mu_E the queue is unstable, the SC is
        never forced off and stable is False with p_off = 0 and P_ho = 0.
    Throws:
        DomainError if mu_E <= 0
    """
    if not service_rate_per_s > 0:
        raise DomainError(f"energy consumption rate must be > 0, got {service_rate_per_s}")

    rho = energy.arrival_rate_per_s / service_rate_per_s
    if rho >= 1.0:
        return QueueAnalytics(rho, 0.0, 0.0, 0.0, 0.0, False, 0.0)

    p_off = 1.0 - rho
    p_one = p_off * math.expm1(rho)
    shutdown_rate = p_one * service_rate_per_s * math.exp(-rho)
    handover_power = 2.0 * energy.handover_cost_j * shutdown_rate
    return QueueAnalytics(rho, p_off, p_one, shutdown_rate, handover_power, True,
                          energy.arrival_rate_per_s * p_off)
