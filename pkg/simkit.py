"""
Monte Carlo and discrete-event oracles for the analytic model

Three independent checks of the closed forms:
    estimate_outage: typical users drawn from the PPP with Rayleigh fading
    simulate_energy_queue: the M/D/1 energy buffer, event by event
    simulate_policy: a simpy rollout of one period's SC decision, pricing
        every state change on the macro's power model

Random numbers come from numpy's counter-based Philox generator seeded via
SeedSequence, so a seed gives the same stream on every platform and worker
streams are split with spawn.
"""

## modules
import csv
import enum
import logging
import math
from pathlib import Path
from typing import List, Union

import numpy as np
import simpy
from recordclass import recordclass
from scipy import stats

## local imports
from config.energy import EnergyConfig
from config.network import NetworkConfig, QosSpec
from eots import EotsDecision
from modelcore import TrafficSnapshot, UserClass, derive_constants, expected_user_count
from powermodel import macro_power, ongrid_power_sc_off
from shapererrors import DomainError

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence]

UserSample = recordclass("UserSample", "user_class distance_m fading peers")
# distance_m: to the serving BS (the macro for MSUs and MMUs, the SC for SSUs);
# peers: other users of the same class in the realization

OutageEstimate = recordclass("OutageEstimate",
                             "probability n_samples ci_low ci_high std_error")

QueueTrace = recordclass(
    "QueueTrace",
    "empirical_p_off empirical_p_one empirical_shutdown_rate events seed horizon_s")
# empirical_p_off / p_one: time-averaged P{length = 0} / P{length = 1};
# empirical_shutdown_rate: 1 -> 0 transitions per second

PolicyLedger = recordclass(
    "PolicyLedger",
    "ongrid_energy_j handover_count sc_uptime_fraction mean_power_w shutdown_count horizon_s")

TRACE_FIELDS = ("time_s", "queue_len", "sc_state", "event_type")

# full_field gives up after this many realizations
MAX_FIELD_REALIZATIONS = 100_000
# queue runs shorter than this are accepted with a warning
MIN_QUEUE_ARRIVALS = 1000


class MsuPlacement(enum.Enum):
    EXACT = "exact"              # uniform in the SC disc
    APPROXIMATE = "approximate"  # every MSU at the SC site, D_ms from the macro


def make_generator(seed: SeedLike) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn_generators(seed: SeedLike, n: int) -> List[np.random.Generator]:
    """
    n independent generators for parallel workers, in a fixed order
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in seed.spawn(n)]


def wilson_interval(successes: int, n: int, confidence: float = 0.95):
    """
    Wilson score interval for a binomial proportion

    Returns:
        (low, high)
    """
    if n <= 0:
        raise DomainError(f"sample count must be >= 1, got {n}")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _serving_cell(user_class: UserClass, net: NetworkConfig):
    return net.sc if UserClass(user_class) is UserClass.SSU else net.macro


def sinr(user_class: UserClass, net: NetworkConfig, qos: QosSpec, distance_m, fading):
    """
    gamma = P_T d^-alpha h / ((theta + 1) sigma^2 W)

    A user's transmit power and noise both scale with its bandwidth share,
    so no per-user bandwidth appears here.
    """
    cell = _serving_cell(user_class, net)
    distance_m = np.asarray(distance_m, dtype=float)
    return (cell.tx_power_w * distance_m ** -cell.pathloss_exp * np.asarray(fading)
            / ((cell.interference_factor + 1) * qos.noise_density_w_per_hz * cell.bandwidth_hz))


def _uniform_disc(rng: np.random.Generator, radius_m: float, n: int):
    r = radius_m * np.sqrt(rng.random(n))
    angle = rng.uniform(0.0, 2 * np.pi, n)
    return r * np.cos(angle), r * np.sin(angle)


def _msu_distances(rng: np.random.Generator, net: NetworkConfig, n: int,
                   placement: MsuPlacement) -> np.ndarray:
    d_ms = net.sc.macro_sc_distance_m
    if MsuPlacement(placement) is MsuPlacement.APPROXIMATE:
        return np.full(n, d_ms)
    x, y = _uniform_disc(rng, net.sc.coverage_radius_m, n)
    return np.hypot(d_ms + x, y)


def _outage_count(user_class, net, qos, allocated_bw_hz, distance, fading, peers) -> int:
    gamma = sinr(user_class, net, qos, distance, fading)
    rate = allocated_bw_hz / (np.asarray(peers) + 1.0) * np.log2(1.0 + gamma)
    return int(np.count_nonzero(rate < qos.rate_threshold_bps))


def estimate_outage(user_class: UserClass, net: NetworkConfig, qos: QosSpec,
                    traffic: TrafficSnapshot, offload_fraction: float, allocated_bw_hz: float,
                    n_samples: int, seed: SeedLike,
                    msu_placement: MsuPlacement = MsuPlacement.APPROXIMATE,
                    full_field: bool = False) -> OutageEstimate:
    """
    Empirical rate outage P{r < R_th} of a typical user of a class

    Args:
        user_class: SSU, MSU or MMU
        offload_fraction: phi, sets the SSU/MSU peer means
        allocated_bw_hz: bandwidth the class shares, w_u = w / (K + 1)
        n_samples: typical users drawn (at least this many users with
            full_field)
        msu_placement: MSU distance model; APPROXIMATE puts every MSU at the
            SC site as the closed form does, EXACT draws it in the SC disc
        full_field: draw whole realizations with sample_user_field and use
            every user of the class instead of independent typical users
    Returns:
        OutageEstimate with a 95% Wilson interval
    Throws:
        DomainError if full_field cannot collect n_samples users within
        MAX_FIELD_REALIZATIONS realizations
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1, got {n_samples}")
    if not allocated_bw_hz > 0:
        raise DomainError(f"allocated bandwidth must be > 0, got {allocated_bw_hz}")
    user_class = UserClass(user_class)
    rng = make_generator(seed)

    mean_peers = expected_user_count(user_class, traffic, net, offload_fraction)
    if full_field:
        if mean_peers == 0:
            raise DomainError(f"no {user_class.value} users at these densities")
        if n_samples / mean_peers > MAX_FIELD_REALIZATIONS:
            raise DomainError(f"{n_samples} {user_class.value} users need about "
                              f"{n_samples / mean_peers:.3g} realizations at a mean of "
                              f"{mean_peers:.3g} per field, over {MAX_FIELD_REALIZATIONS}")
        users = []
        for _ in range(MAX_FIELD_REALIZATIONS):
            field = _draw_field(rng, traffic, net, offload_fraction, msu_placement)
            users.extend(u for u in field if u.user_class == user_class.value)
            if len(users) >= n_samples:
                break
        else:
            raise DomainError(f"only {len(users)} of {n_samples} {user_class.value} users "
                              f"after {MAX_FIELD_REALIZATIONS} realizations")
        distance = np.array([u.distance_m for u in users])
        fading = np.array([u.fading for u in users])
        peers = np.array([u.peers for u in users])
    else:
        peers = rng.poisson(mean_peers, n_samples)
        if user_class is UserClass.MSU:
            distance = _msu_distances(rng, net, n_samples, msu_placement)
        else:
            radius = _serving_cell(user_class, net).coverage_radius_m
            distance = radius * np.sqrt(rng.random(n_samples))
        fading = rng.exponential(1.0, n_samples)

    n = len(distance)
    outages = _outage_count(user_class, net, qos, allocated_bw_hz, distance, fading, peers)
    p = outages / n
    low, high = wilson_interval(outages, n)
    return OutageEstimate(p, n, low, high, math.sqrt(p * (1 - p) / n))


def _draw_field(rng: np.random.Generator, traffic: TrafficSnapshot, net: NetworkConfig,
                offload_fraction: float,
                msu_placement: MsuPlacement = MsuPlacement.EXACT) -> List[UserSample]:
    d_m = net.macro.coverage_radius_m
    d_s = net.sc.coverage_radius_m
    d_ms = net.sc.macro_sc_distance_m

    # MMUs: uniform over the macro disc outside the SC disc (rejection)
    n_mmu = rng.poisson(traffic.macro_density * np.pi * (d_m ** 2 - d_s ** 2))
    xs, ys = np.empty(0), np.empty(0)
    while xs.size < n_mmu:
        x, y = _uniform_disc(rng, d_m, 2 * (n_mmu - xs.size) + 16)
        keep = np.hypot(x - d_ms, y) > d_s
        xs, ys = np.concatenate([xs, x[keep]]), np.concatenate([ys, y[keep]])
    mmu_distance = np.hypot(xs[:n_mmu], ys[:n_mmu])

    # SC users, each offloaded independently with probability phi
    n_sc = rng.poisson(traffic.sc_density * np.pi * d_s ** 2)
    x, y = _uniform_disc(rng, d_s, n_sc)
    offloaded = rng.random(n_sc) < offload_fraction
    ssu_distance = np.hypot(x[offloaded], y[offloaded])
    if MsuPlacement(msu_placement) is MsuPlacement.EXACT:
        msu_distance = np.hypot(d_ms + x[~offloaded], y[~offloaded])
    else:
        msu_distance = np.full(int(np.count_nonzero(~offloaded)), d_ms)

    samples = []
    for user_class, distance in ((UserClass.MMU, mmu_distance),
                                 (UserClass.MSU, msu_distance),
                                 (UserClass.SSU, ssu_distance)):
        fading = rng.exponential(1.0, distance.size)
        peers = max(distance.size - 1, 0)
        samples.extend(UserSample(user_class.value, float(d), float(h), peers)
                       for d, h in zip(distance, fading))
    return samples


def sample_user_field(traffic: TrafficSnapshot, net: NetworkConfig, offload_fraction: float,
                      seed: SeedLike) -> List[UserSample]:
    """
    One spatial realization of every user in the macro cell

    Counts are Poisson with area times density means; positions are uniform
    in each region and MSUs sit at their exact positions.
    """
    if not 0.0 <= offload_fraction <= 1.0:
        raise DomainError(f"offload fraction {offload_fraction} outside [0, 1]")
    return _draw_field(make_generator(seed), traffic, net, offload_fraction)


def _write_trace(path, rows):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=TRACE_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"wrote {len(rows)} trace events to {path}")


def simulate_energy_queue(lambda_e: float, mu_e: float, n_arrivals: int, seed: SeedLike,
                          trace_path=None) -> QueueTrace:
    """
    Event simulation of the energy buffer over n_arrivals Poisson arrivals

    Departures follow the Lindley recursion for deterministic service,
    D_k = max(A_k, D_(k-1)) + 1/mu = (k + 1)/mu + max_(j<=k)(A_j - j/mu),
    and the length process is rebuilt by merging arrival and departure
    epochs up to the last arrival.

    Args:
        trace_path: if given, the event list is written there as CSV
    """
    if not (lambda_e > 0 and mu_e > 0):
        raise DomainError(f"rates must be > 0, got lambda={lambda_e}, mu={mu_e}")
    if n_arrivals < 2:
        raise DomainError(f"n_arrivals must be >= 2, got {n_arrivals}")
    if n_arrivals < MIN_QUEUE_ARRIVALS:
        logger.warning(f"only {n_arrivals} energy arrivals; estimates below "
                       f"{MIN_QUEUE_ARRIVALS} arrivals are unreliable")
    rng = make_generator(seed)
    service = 1.0 / mu_e

    arrivals = np.cumsum(rng.exponential(1.0 / lambda_e, n_arrivals))
    k = np.arange(n_arrivals)
    departures = (k + 1) * service + np.maximum.accumulate(arrivals - k * service)
    horizon = arrivals[-1]
    departures = departures[departures <= horizon]

    times = np.concatenate([arrivals, departures])
    steps = np.concatenate([np.ones(arrivals.size, dtype=np.int64),
                            -np.ones(departures.size, dtype=np.int64)])
    order = np.argsort(times, kind="stable")
    times, steps = times[order], steps[order]
    length = np.cumsum(steps)
    held = np.diff(np.append(times, horizon))

    p_off = (times[0] + held[length == 0].sum()) / horizon
    p_one = held[length == 1].sum() / horizon
    shutdowns = int(np.count_nonzero((steps < 0) & (length == 0)))

    if trace_path is not None:
        kind = np.where(steps > 0, "arrival", "departure")
        rows = [{"time_s": repr(float(t)), "queue_len": int(n),
                 "sc_state": "on" if n > 0 else "off",
                 "event_type": "shutdown" if (s < 0 and n == 0) else e}
                for t, n, s, e in zip(times, length, steps, kind)]
        _write_trace(trace_path, rows)

    seed_value = seed.entropy if isinstance(seed, np.random.SeedSequence) else seed
    return QueueTrace(float(p_off), float(p_one), shutdowns / horizon, int(times.size),
                      seed_value, float(horizon))


class _PolicyRollout:
    """
    simpy model of one period: Poisson energy arrivals feed the buffer, the
    active SC drains one unit per 1/mu_E, and the macro absorbs the SSUs
    whenever the buffer is empty
    """

    def __init__(self, env: simpy.Environment, rng: np.random.Generator, lambda_e: float,
                 mu_e: float, power_on_w: float, power_off_w: float, c_ho: float,
                 record: bool = False):
        self.env = env
        self.rng = rng
        self.lambda_e = lambda_e
        self.service_s = 1.0 / mu_e
        self.power_w = {True: power_on_w, False: power_off_w}
        self.c_ho = c_ho
        self.buffer = 0
        self.sc_on = False
        self.since = 0.0
        self.energy_j = 0.0
        self.uptime_s = 0.0
        self.handovers = 0
        self.shutdowns = 0
        self.wake = env.event()
        self.rows = [] if record else None

    def _log(self, event_type: str):
        if self.rows is not None:
            self.rows.append({"time_s": repr(float(self.env.now)), "queue_len": self.buffer,
                              "sc_state": "on" if self.sc_on else "off",
                              "event_type": event_type})

    def settle(self):
        elapsed = self.env.now - self.since
        self.energy_j += elapsed * self.power_w[self.sc_on]
        if self.sc_on:
            self.uptime_s += elapsed
        self.since = self.env.now

    def _switch(self, on: bool):
        self.settle()
        self.sc_on = on
        self.handovers += 1
        self.energy_j += self.c_ho
        if not on:
            self.shutdowns += 1
        self._log("wakeup" if on else "shutdown")

    def arrivals(self):
        while True:
            yield self.env.timeout(self.rng.exponential(1.0 / self.lambda_e))
            self.buffer += 1
            self._log("arrival")
            if not self.sc_on:
                self._switch(True)
                self.wake.succeed()
                self.wake = self.env.event()

    def consumer(self):
        while True:
            if self.buffer == 0:
                yield self.wake
            yield self.env.timeout(self.service_s)
            self.buffer -= 1
            self._log("departure")
            if self.buffer == 0:
                self._switch(False)


def simulate_policy(traffic: TrafficSnapshot, energy: EnergyConfig, net: NetworkConfig,
                    qos: QosSpec, decision: EotsDecision, horizon_s: float, seed: SeedLike,
                    trace_path=None) -> PolicyLedger:
    """
    Roll one period's decision out event by event and integrate on-grid energy

    The macro spends w_mm + w_msa while the SC is on and additionally w_mso
    while the buffer is empty; each off/on transition costs C_ho. The SC
    starts the period asleep with an empty buffer.

    Returns:
        PolicyLedger
    """
    if not horizon_s > 0:
        raise DomainError(f"horizon must be > 0, got {horizon_s}")
    if not decision.activate_sc:
        p_off = ongrid_power_sc_off(traffic, net, qos, derive_constants(net, qos))
        return PolicyLedger(p_off * horizon_s, 0, 0.0, p_off, 0, horizon_s)

    op = decision.operating
    power_on = macro_power(net, op.w_mm_hz + op.w_msa_hz)
    power_off = macro_power(net, op.w_mm_hz + op.w_msa_hz + op.w_mso_hz)

    lam = energy.arrival_rate_per_s
    if lam == 0:
        # no energy ever arrives: the SC never wakes
        return PolicyLedger(power_off * horizon_s, 0, 0.0, power_off, 0, horizon_s)

    env = simpy.Environment()
    rollout = _PolicyRollout(env, make_generator(seed), lam, op.mu_e_per_s, power_on,
                             power_off, energy.handover_cost_j, record=trace_path is not None)
    env.process(rollout.arrivals())
    env.process(rollout.consumer())
    env.run(until=horizon_s)
    rollout.settle()

    if trace_path is not None:
        _write_trace(trace_path, rollout.rows)
    logger.debug(f"rollout: {rollout.handovers} handovers, uptime "
                 f"{rollout.uptime_s / horizon_s:.4f} over {horizon_s:g} s")
    return PolicyLedger(rollout.energy_j, rollout.handovers, rollout.uptime_s / horizon_s,
                        rollout.energy_j / horizon_s, rollout.shutdowns, horizon_s)

