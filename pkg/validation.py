"""
Analytic-versus-simulated validation suites

    outage: outage targets met at the equality bandwidths (SSUs, MMUs) and
        the MSU closed form against exact MSU placement
    queue: energy-buffer analytics against the event simulation
    rollout: the mean on-grid power of an active SC against an event-level
        rollout of the same period

Each check produces one ValidationRow. Tolerances are absolute for
probabilities and relative for rates and powers.

outage_curve is the same outage comparison as a function of R_th, with no
pass/fail attached.
"""

## modules
import enum
import logging
from typing import List, Sequence

import numpy as np
from recordclass import recordclass

## local imports
from config.energy import EnergyConfig
from config.network import NetworkConfig, QosSpec
from energyqueue import analyze_queue
from eots import eots_decision, greedy_decision
from modelcore import TrafficSnapshot, UserClass, closed_form_outage, derive_constants, \
    expected_user_count, required_bandwidth, snapshot_per_km2
from powermodel import ongrid_power_active, ongrid_power_sc_off
from scenario import parallel_map
from shapererrors import ValidationFailure
from simkit import MsuPlacement, estimate_outage, simulate_energy_queue, simulate_policy

logger = logging.getLogger(__name__)

ValidationRow = recordclass("ValidationRow",
                            "suite case analytic simulated tolerance relative passed")
VALIDATION_FIELDS = ("suite", "case", "analytic", "simulated", "tolerance", "relative", "passed")

OUTAGE_CURVE_FIELDS = ("r_th_bps", "user_class", "analytic", "simulated", "ci_low", "ci_high")
OutageCurveRow = recordclass("OutageCurveRow", OUTAGE_CURVE_FIELDS)

OUTAGE_TOL = 0.02
QUEUE_PROB_TOL = 0.01
QUEUE_RATE_RTOL = 0.05
ROLLOUT_RTOL = 0.02

# outage densities (users/km^2); the macro bandwidth is not a capacity here
OUTAGE_RHO_M = 20.0
OUTAGE_RHO_S = 60.0
SSU_PHIS = (0.25, 0.5, 1.0)
# the MSU closed form is checked where it is a small-outage approximation
MSU_RATE_BPS = 10e3
MSU_BANDWIDTH_HZ = 1e6
MSU_DISTANCES_M = (400.0, 600.0, 800.0)

QUEUE_UTILIZATIONS = (0.3, 0.5, 0.7, 0.9)

ROLLOUT_RHO_M = 5.0
ROLLOUT_RHO_S = 60.0
ROLLOUT_LAMBDA = 50.0
ROLLOUT_C_HO = 0.1


class Suite(enum.Enum):
    OUTAGE = "outage"
    QUEUE = "queue"
    ROLLOUT = "rollout"
    ALL = "all"


def _row(suite: str, case: str, analytic: float, simulated: float, tolerance: float,
         relative: bool = False) -> ValidationRow:
    error = abs(simulated - analytic)
    bound = tolerance * abs(analytic) if relative else tolerance
    return ValidationRow(suite, case, float(analytic), float(simulated), tolerance, relative,
                         bool(error <= bound))


def outage_cases(net: NetworkConfig, qos: QosSpec):
    """
    (case, user_class, net, qos, traffic, phi, allocated_bw_hz, analytic,
    placement) for every outage check
    """
    traffic = snapshot_per_km2(OUTAGE_RHO_M, OUTAGE_RHO_S)
    consts = derive_constants(net, qos)
    cases = []
    for phi in SSU_PHIS:
        w = required_bandwidth(UserClass.SSU,
                               expected_user_count(UserClass.SSU, traffic, net, phi), qos, consts)
        cases.append((f"ssu phi={phi:g}", UserClass.SSU, net, qos, traffic, phi, w,
                      qos.outage_target, MsuPlacement.EXACT))

    w = required_bandwidth(UserClass.MMU, expected_user_count(UserClass.MMU, traffic, net),
                           qos, consts)
    cases.append((f"mmu rho_m={OUTAGE_RHO_M:g}", UserClass.MMU, net, qos, traffic, 0.0, w,
                  qos.outage_target, MsuPlacement.EXACT))

    msu_qos = qos.with_(rate_threshold_bps=MSU_RATE_BPS)
    for d_ms in MSU_DISTANCES_M:
        # the macro disc grows if needed to keep the SC inside it
        reach = d_ms + net.sc.coverage_radius_m
        msu_net = net.with_(macro={"coverage_radius_m": max(net.macro.coverage_radius_m, reach)},
                            sc={"macro_sc_distance_m": d_ms})
        analytic = closed_form_outage(UserClass.MSU, msu_net, msu_qos, traffic, 0.0,
                                      MSU_BANDWIDTH_HZ)
        cases.append((f"msu d_ms={d_ms:g}", UserClass.MSU, msu_net, msu_qos, traffic, 0.0,
                      MSU_BANDWIDTH_HZ, analytic, MsuPlacement.EXACT))
    return cases


def outage_suite(net: NetworkConfig, qos: QosSpec, samples: int, seed: int,
                 workers: int = 1) -> List[ValidationRow]:
    cases = outage_cases(net, qos)
    streams = np.random.SeedSequence(seed).spawn(len(cases))

    def run(item):
        (case, user_class, case_net, case_qos, traffic, phi, w, analytic, placement), stream = item
        estimate = estimate_outage(user_class, case_net, case_qos, traffic, phi, w,
                                   samples, stream, msu_placement=placement)
        return _row(Suite.OUTAGE.value, case, analytic, estimate.probability, OUTAGE_TOL)

    return parallel_map(run, list(zip(cases, streams)), workers)


def queue_suite(n_arrivals: int, seed: int, workers: int = 1) -> List[ValidationRow]:
    streams = np.random.SeedSequence(seed).spawn(len(QUEUE_UTILIZATIONS))

    def run(item):
        rho, stream = item
        analytics = analyze_queue(EnergyConfig(arrival_rate_per_s=rho), 1.0)
        trace = simulate_energy_queue(rho, 1.0, n_arrivals, stream)
        suite = Suite.QUEUE.value
        return [_row(suite, f"p_off rho={rho:g}", analytics.off_probability,
                     trace.empirical_p_off, QUEUE_PROB_TOL),
                _row(suite, f"p_one rho={rho:g}", analytics.p_one,
                     trace.empirical_p_one, QUEUE_PROB_TOL),
                _row(suite, f"shutdown rate rho={rho:g}", analytics.cycle_rate_per_s,
                     trace.empirical_shutdown_rate, QUEUE_RATE_RTOL, relative=True)]

    chunks = parallel_map(run, list(zip(QUEUE_UTILIZATIONS, streams)), workers)
    return [row for chunk in chunks for row in chunk]


def rollout_suite(net: NetworkConfig, qos: QosSpec, seed: int,
                  expected_arrivals: float = 1e5) -> List[ValidationRow]:
    """
    Greedy activation of a stable instance, and a zero-energy period that
    keeps the SC off
    """
    traffic = snapshot_per_km2(ROLLOUT_RHO_M, ROLLOUT_RHO_S)
    consts = derive_constants(net, qos)
    energy = EnergyConfig(arrival_rate_per_s=ROLLOUT_LAMBDA, unit_joules=1.0,
                          handover_cost_j=ROLLOUT_C_HO)
    horizon = expected_arrivals / ROLLOUT_LAMBDA
    suite = Suite.ROLLOUT.value

    active = greedy_decision(traffic, energy, net, qos, consts)
    ledger = simulate_policy(traffic, energy, net, qos, active, horizon, seed)
    rows = [_row(suite, f"active lambda={ROLLOUT_LAMBDA:g}",
                 ongrid_power_active(active.operating, net), ledger.mean_power_w,
                 ROLLOUT_RTOL, relative=True)]

    dark = energy.with_(arrival_rate_per_s=0.0)
    off = eots_decision(traffic, dark, net, qos, consts)
    ledger = simulate_policy(traffic, dark, net, qos, off, horizon, seed)
    rows.append(_row(suite, "sc off", ongrid_power_sc_off(traffic, net, qos, consts),
                     ledger.mean_power_w, 1e-12, relative=True))
    return rows


def outage_curve(net: NetworkConfig, qos: QosSpec, r_th_grid: Sequence[float],
                 samples: int = 5000, seed: int = 0, offload_fraction: float = 0.5,
                 traffic: TrafficSnapshot = None, workers: int = 1) -> List[OutageCurveRow]:
    """
    Analytic and simulated outage of every user class as R_th grows

    Each class keeps the bandwidth that meets the outage target at the
    configured R_th, so the curves cross eta there. MSUs are drawn at their
    exact positions in the SC disc.

    Args:
        r_th_grid: rate thresholds in bps, each > 0
        offload_fraction: phi, splits the SC users into SSUs and MSUs
        traffic: user densities; OUTAGE_RHO_M, OUTAGE_RHO_S per km^2 if None
    Returns:
        rows ordered by R_th, then SSU, MSU, MMU
    """
    if len(r_th_grid) == 0:
        raise ValueError("R_th grid is empty")
    if traffic is None:
        traffic = snapshot_per_km2(OUTAGE_RHO_M, OUTAGE_RHO_S)
    consts = derive_constants(net, qos)
    classes = (UserClass.SSU, UserClass.MSU, UserClass.MMU)
    bandwidths = {c: required_bandwidth(c, expected_user_count(c, traffic, net, offload_fraction),
                                        qos, consts)
                  for c in classes}
    tasks = [(float(r_th), c) for r_th in r_th_grid for c in classes]
    streams = np.random.SeedSequence(seed).spawn(len(tasks))

    def run(item):
        (r_th, user_class), stream = item
        # QosSpec.with_ rejects R_th <= 0
        point_qos = qos.with_(rate_threshold_bps=r_th)
        w = bandwidths[user_class]
        analytic = closed_form_outage(user_class, net, point_qos, traffic, offload_fraction, w)
        estimate = estimate_outage(user_class, net, point_qos, traffic, offload_fraction, w,
                                   samples, stream, msu_placement=MsuPlacement.EXACT)
        return OutageCurveRow(r_th, user_class.value, analytic, estimate.probability,
                              estimate.ci_low, estimate.ci_high)

    return parallel_map(run, list(zip(tasks, streams)), workers)


def run_validation(suite: Suite, net: NetworkConfig, qos: QosSpec, samples: int = 5000,
                   arrivals: int = 1_000_000, seed: int = 0,
                   workers: int = 1) -> List[ValidationRow]:
    """
    Run one suite (or all) and return the table rows in a fixed order
    """
    suite = Suite(suite)
    rows = []
    if suite in (Suite.OUTAGE, Suite.ALL):
        logger.info(f"outage suite: {samples} samples per case")
        rows += outage_suite(net, qos, samples, seed, workers)
    if suite in (Suite.QUEUE, Suite.ALL):
        logger.info(f"queue suite: {arrivals} arrivals per utilization")
        rows += queue_suite(arrivals, seed, workers)
    if suite in (Suite.ROLLOUT, Suite.ALL):
        logger.info("rollout suite")
        rows += rollout_suite(net, qos, seed)
    return rows


def check_rows(rows: List[ValidationRow]):
    """
    Throws:
        ValidationFailure listing every row outside its tolerance
    """
    failures = [row for row in rows if not row.passed]
    if failures:
        raise ValidationFailure(failures)
