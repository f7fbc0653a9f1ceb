"""
Scenario runner: configuration ingestion, whole-day policy evaluation and
gain sweeps

Work items (periods, sweep points) are independent and run in a thread
pool; results always come back in input order.
"""

## modules
import csv
import enum
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from recordclass import recordclass

## local imports
from config.energy import EnergyConfig
from config.loader import ROOT_TAG, read_tree
from config.network import MacroConfig, NetworkConfig, QosSpec, SmallCellConfig, load_section
from config.profiles import DailyProfiles
from eots import best_active_gain, eots_decision, feasible_mu_range, greedy_decision
from modelcore import derive_constants, snapshot_per_km2
from powermodel import GainForm, operating_point, total_gain
from shapererrors import MacroInfeasibleError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path(__file__).resolve().parent / "data" / "table1.cfg"
DEFAULT_PROFILES = Path(__file__).resolve().parent / "data" / "day24.csv"

# scale of the shipped normalized day
RHO_M_MAX_PER_KM2 = 5.0
RHO_S_MAX_PER_KM2 = 100.0
LAMBDA_MAX_PER_S = 40.0

DAY_FIELDS = ("period", "start_s", "duration_s", "c_ho", "policy", "activate_sc", "mu_e",
              "phi", "p_off", "delta_p_w", "regime", "infeasible", "lambda_max")
SWEEP_FIELDS = ("lambda_e", "c_ho", "delta_p_active_w", "delta_p_eots_w", "mu_e", "regime")
GAIN_FIELDS = ("mu_e", "delta_p_closed_w", "delta_p_pipeline_w", "p_off", "p_ho_w")

DayRow = recordclass("DayRow", DAY_FIELDS)
DaySummary = recordclass("DaySummary",
                         "c_ho avg_gain_eots_w avg_gain_greedy_w infeasible_periods lambda_max")
DayReport = recordclass("DayReport", "rows summaries")
# summaries: one DaySummary per C_ho; averages are duration-weighted over the
# feasible periods, None for a policy that was not run. lambda_max is the
# harvest scale of the day, None when the profile was not scaled

SweepRow = recordclass("SweepRow", SWEEP_FIELDS)
GainRow = recordclass("GainRow", GAIN_FIELDS)


class PolicyChoice(enum.Enum):
    EOTS = "eots"
    GREEDY = "greedy"
    BOTH = "both"

    def policies(self) -> Tuple[str, ...]:
        if self is PolicyChoice.BOTH:
            return ("eots", "greedy")
        return (self.value,)


def load_config(path=DEFAULT_CONFIG) -> Tuple[NetworkConfig, QosSpec, EnergyConfig]:
    """
    Read a config file (flat dotted keys or XML) into validated, frozen sections

    Throws:
        ConfigError with the key and, when known, the line
    """
    root = read_tree(path)
    known = {MacroConfig.expected_root, SmallCellConfig.expected_root,
             QosSpec.expected_root, EnergyConfig.expected_root}
    for child in root:
        if child.tag not in known:
            logger.warning(f"Unrecognized config section '{child.tag}' in <{ROOT_TAG}>, "
                           f"ignoring it")
    net = NetworkConfig.from_tree(root)
    qos = load_section(QosSpec, root)
    energy = load_section(EnergyConfig, root)
    logger.info(f"loaded configuration from {path}")
    return net, qos, energy


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """
    [fn(item) for item in items], on a thread pool when workers > 1
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="shaper") as pool:
        return list(pool.map(fn, items))


def _weighted_mean(rows: Sequence[DayRow], policy: str):
    rows = [r for r in rows if r.policy == policy and not r.infeasible]
    total = sum(r.duration_s for r in rows)
    if total == 0:
        return math.nan if rows else None
    return sum(r.delta_p_w * r.duration_s for r in rows) / total


def run_day(profiles: DailyProfiles, configs: Tuple[NetworkConfig, QosSpec, EnergyConfig],
            policy: PolicyChoice = PolicyChoice.BOTH, c_ho_list: Sequence[float] = (0.0,),
            workers: int = 1, lambda_max: float = None) -> DayReport:
    """
    Decide every period of a day under EOTS and/or greedy for each C_ho

    A macro-infeasible period gets rows flagged infeasible and is left out
    of the averages; the run carries on.
    """
    net, qos, energy = configs
    consts = derive_constants(net, qos)
    policies = PolicyChoice(policy).policies()
    deciders = {"eots": eots_decision, "greedy": greedy_decision}

    def decide(task):
        c_ho, index, period = task
        traffic = snapshot_per_km2(period.rho_m_per_km2, period.rho_s_per_km2)
        period_energy = energy.with_(arrival_rate_per_s=period.lambda_e_per_s,
                                     handover_cost_j=c_ho)
        rows = []
        for name in policies:
            try:
                decision = deciders[name](traffic, period_energy, net, qos, consts)
            except MacroInfeasibleError as e:
                logger.warning(f"period {index} ({period.label or period.start_s}): {e.message}")
                rows.append(DayRow(index, period.start_s, period.duration_s, c_ho, name,
                                   None, None, None, None, None, None, True, lambda_max))
                continue
            op = decision.operating
            rows.append(DayRow(index, period.start_s, period.duration_s, c_ho, name,
                               decision.activate_sc, decision.mu_e_per_s, op.offload_fraction,
                               op.queue.off_probability, decision.predicted_gain_w,
                               decision.regime.tag.value, False, lambda_max))
        return rows

    tasks = [(float(c), i, p) for c in c_ho_list for i, p in enumerate(profiles)]
    rows = [row for chunk in parallel_map(decide, tasks, workers) for row in chunk]

    summaries = []
    for c_ho in c_ho_list:
        mine = [r for r in rows if r.c_ho == float(c_ho)]
        infeasible = len({r.period for r in mine if r.infeasible})
        summary = DaySummary(float(c_ho), _weighted_mean(mine, "eots"),
                             _weighted_mean(mine, "greedy"), infeasible, lambda_max)
        logger.info(f"C_ho={c_ho:g} J: EOTS {summary.avg_gain_eots_w} W, "
                    f"greedy {summary.avg_gain_greedy_w} W")
        summaries.append(summary)
    return DayReport(rows, summaries)


def run_scaled_days(fractions: DailyProfiles,
                    configs: Tuple[NetworkConfig, QosSpec, EnergyConfig],
                    policy: PolicyChoice, c_ho_list: Sequence[float],
                    lambda_max_list: Sequence[float], rho_m_max: float = RHO_M_MAX_PER_KM2,
                    rho_s_max: float = RHO_S_MAX_PER_KM2, workers: int = 1) -> DayReport:
    """
    run_day once per maximum energy arrival rate on a normalized profile

    Rows and summaries of every day are concatenated in the given order, so
    the summaries trace the average gain against the harvest scale.
    """
    if len(lambda_max_list) == 0:
        raise ValueError("lambda_max list is empty")
    rows, summaries = [], []
    for lambda_max in lambda_max_list:
        profiles = fractions.scaled(rho_m_max, rho_s_max, float(lambda_max))
        report = run_day(profiles, configs, policy, c_ho_list, workers, float(lambda_max))
        rows += report.rows
        summaries += report.summaries
    return DayReport(rows, summaries)


def sweep_gain(configs: Tuple[NetworkConfig, QosSpec, EnergyConfig], traffic,
               lambda_e_grid: Sequence[float], c_ho_list: Sequence[float],
               workers: int = 1) -> List[SweepRow]:
    """
    EOTS gain against the energy arrival rate, one column per C_ho

    delta_p_active_w is the best gain with the SC forced on and may be
    negative; delta_p_eots_w = max(0, delta_p_active_w) is what EOTS
    achieves once switching the SC off is allowed.
    """
    net, qos, energy = configs
    if len(lambda_e_grid) == 0:
        raise ValueError("lambda_e grid is empty")
    consts = derive_constants(net, qos)

    def point(task):
        c_ho, lam = task
        point_energy = energy.with_(arrival_rate_per_s=lam, handover_cost_j=c_ho)
        gain, mu, regime = best_active_gain(traffic, point_energy, net, qos, consts)
        eots = gain if gain > 0 else 0.0
        return SweepRow(lam, c_ho, gain, eots, mu, regime.tag.value)

    tasks = [(float(c), float(lam)) for c in c_ho_list for lam in lambda_e_grid]
    return parallel_map(point, tasks, workers)


def gain_curve(configs: Tuple[NetworkConfig, QosSpec, EnergyConfig], traffic,
               n_points: int) -> List[GainRow]:
    """
    Both gain forms over an even grid of the feasible energy consumption rates
    """
    net, qos, energy = configs
    consts = derive_constants(net, qos)
    mu_min, mu_max = feasible_mu_range(energy, net, qos, consts, traffic)
    rows = []
    for mu in np.linspace(mu_min, mu_max, n_points):
        op = operating_point(float(mu), traffic, energy, net, qos, consts)
        closed = total_gain(float(mu), energy, consts, traffic, net, qos, GainForm.CLOSED, op)
        pipeline = total_gain(float(mu), energy, consts, traffic, net, qos, GainForm.PIPELINE, op)
        rows.append(GainRow(op.mu_e_per_s, closed.total_gain_w, pipeline.total_gain_w,
                            op.queue.off_probability, op.queue.handover_power_w))
    return rows


def format_value(value) -> str:
    """
    CSV text of a value: shortest round-trip floats, lower-case booleans
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def to_csv(rows, fields: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([format_value(getattr(row, name)) for name in fields])
    return buffer.getvalue()
