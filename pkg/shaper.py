"""
Command line interface for the traffic shaper

    shaper constants --config data/table1.cfg
    shaper queue --lambda 0.7 --mu 1
    shaper gain --lambda 50 --c-ho 1 --grid 101
    shaper optimize --rho-m 5 --rho-s 60 --lambda 50 --c-ho 1
    shaper day --profiles data/day24.csv --policy both --c-ho 0,1,5 --lambda-max 20,40,80
    shaper sweep --lambda-max 100 --points 50 --c-ho 0,1,2
    shaper outage --r-th-max 200e3 --points 8 --samples 5000
    shaper validate --suite all --samples 5000 --seed 1

Exit codes: 0 success, 1 config or input error, 2 infeasibility detected,
3 validation failure.
"""

## modules
import functools
import json
import logging
import sys

import click
import colorlog
import numpy as np

## local imports
import scenario
from config.energy import EnergyConfig
from config.profiles import load_profiles
from energyqueue import analyze_queue
from eots import eots_decision, greedy_decision
from modelcore import derive_constants, snapshot_per_km2, to_dict
from shapererrors import EXIT_INFEASIBLE, ShaperError
import validation
from validation import VALIDATION_FIELDS, Suite, check_rows, run_validation

logger = logging.getLogger(__name__)


def setup_logging_handlers(level: int = logging.INFO, log_file: str = None):
    """
    This function sets up the error logging to the console (stderr), and to
    log_file if given. Logging can be set up at the top of each file by doing:
    import logging
    logger = logging.getLogger(__name__)
    """
    # get the root logger
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    for handler in list(root_logger.handlers):
        if getattr(handler, "_shaper", False):
            root_logger.removeHandler(handler)

    # console output for the chosen level and worse
    sh = colorlog.StreamHandler(sys.stderr)
    sh.setLevel(level)
    sh.setFormatter(colorlog.ColoredFormatter("%(log_color)s%(levelname)-8s - "
                                              "%(name)-12s - %(threadName)-12s - "
                                              "%(message)s",
                                              reset=True,
                                              log_colors={
                                                  'DEBUG': 'cyan',
                                                  'INFO': 'green',
                                                  'WARNING': 'yellow',
                                                  'ERROR': 'red',
                                                  'CRITICAL': 'red,bg_white',
                                              },
                                              style='%'))
    sh._shaper = True
    root_logger.addHandler(sh)

    if log_file is not None:
        fh = logging.FileHandler(log_file, encoding="utf-8")
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)-8s %(name)s: %(message)s"))
        fh._shaper = True
        root_logger.setLevel(logging.DEBUG)
        root_logger.addHandler(fh)


def exits_on_error(command):
    """
    Map ShaperError onto its exit code; anything unanticipated propagates
    """
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ShaperError as e:
            logger.error(e.message)
            sys.exit(e.error_code)
    return wrapper


def parse_list(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma separated numbers, got '{text}'")


def echo_json(record):
    click.echo(json.dumps(to_dict(record), indent=2))


config_option = click.option("--config", "config_path", default=str(scenario.DEFAULT_CONFIG),
                             show_default=True, help="flat dotted-key or XML config file")
workers_option = click.option("--workers", default=1, show_default=True,
                              help="worker threads")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="log at DEBUG")
@click.option("--log-file", default=None, help="also write DEBUG logs to this file")
def cli(verbose, log_file):
    """Energy-optimal traffic shaping for an off-grid small cell."""
    setup_logging_handlers(logging.DEBUG if verbose else logging.WARNING, log_file)


@cli.command()
@config_option
@exits_on_error
def constants(config_path):
    """Derived spectral efficiencies, zeta_EE and kappa as JSON."""
    net, qos, _ = scenario.load_config(config_path)
    echo_json(derive_constants(net, qos))


@cli.command()
@click.option("--lambda", "lambda_e", type=float, required=True, help="energy arrivals per s")
@click.option("--mu", "mu_e", type=float, required=True, help="energy consumption per s")
@click.option("--c-ho", type=float, default=0.0, show_default=True, help="handover cost, J")
@click.option("--e-j", type=float, default=1.0, show_default=True, help="energy unit, J")
@exits_on_error
def queue(lambda_e, mu_e, c_ho, e_j):
    """Energy queue analytics as JSON."""
    energy = _energy(lambda_e, c_ho, e_j)
    echo_json(analyze_queue(energy, mu_e))


def _energy(lambda_e, c_ho, e_j=1.0) -> EnergyConfig:
    # EnergyConfig.check raises ConfigError, keys named like the config file
    return EnergyConfig(arrival_rate_per_s=lambda_e, handover_cost_j=c_ho, unit_joules=e_j)


@cli.command()
@config_option
@click.option("--lambda", "lambda_e", type=float, required=True)
@click.option("--c-ho", type=float, required=True)
@click.option("--grid", type=int, default=101, show_default=True, help="points over [mu_min, mu_max]")
@click.option("--rho-m", type=float, default=5.0, show_default=True, help="users/km^2")
@click.option("--rho-s", type=float, default=60.0, show_default=True, help="users/km^2")
@exits_on_error
def gain(config_path, lambda_e, c_ho, grid, rho_m, rho_s):
    """Closed-form and pipeline gain over the feasible mu_E range, CSV."""
    net, qos, energy = scenario.load_config(config_path)
    energy = energy.with_(arrival_rate_per_s=lambda_e, handover_cost_j=c_ho)
    rows = scenario.gain_curve((net, qos, energy), snapshot_per_km2(rho_m, rho_s), grid)
    click.echo(scenario.to_csv(rows, scenario.GAIN_FIELDS), nl=False)


@cli.command()
@config_option
@click.option("--rho-m", type=float, required=True, help="users/km^2")
@click.option("--rho-s", type=float, required=True, help="users/km^2")
@click.option("--lambda", "lambda_e", type=float, required=True)
@click.option("--c-ho", type=float, required=True)
@click.option("--policy", type=click.Choice(["eots", "greedy"]), default="eots", show_default=True)
@exits_on_error
def optimize(config_path, rho_m, rho_s, lambda_e, c_ho, policy):
    """One period's decision as JSON."""
    net, qos, energy = scenario.load_config(config_path)
    energy = energy.with_(arrival_rate_per_s=lambda_e, handover_cost_j=c_ho)
    decide = eots_decision if policy == "eots" else greedy_decision
    echo_json(decide(snapshot_per_km2(rho_m, rho_s), energy, net, qos))


@cli.command()
@config_option
@click.option("--profiles", "profiles_path", default=str(scenario.DEFAULT_PROFILES),
              show_default=True)
@click.option("--policy", type=click.Choice([p.value for p in scenario.PolicyChoice]),
              default="both", show_default=True)
@click.option("--c-ho", "c_ho", default="0,1,5", show_default=True, help="comma separated, J")
@click.option("--rho-m-max", type=float, default=scenario.RHO_M_MAX_PER_KM2, show_default=True)
@click.option("--rho-s-max", type=float, default=scenario.RHO_S_MAX_PER_KM2, show_default=True)
@click.option("--lambda-max", "lambda_max", default=f"{scenario.LAMBDA_MAX_PER_S:g}",
              show_default=True, help="comma separated, one day per value")
@click.option("--absolute", is_flag=True, help="profile columns are absolute, do not scale")
@click.option("--out", default=None, help="write the per-period CSV here instead of stdout")
@click.option("--summary", default=None, help="write the JSON summary here instead of stdout")
@workers_option
@exits_on_error
def day(config_path, profiles_path, policy, c_ho, rho_m_max, rho_s_max, lambda_max, absolute,
        out, summary, workers):
    """Per-period EOTS and greedy decisions over a daily profile."""
    configs = scenario.load_config(config_path)
    profiles = load_profiles(profiles_path)
    policy = scenario.PolicyChoice(policy)
    if absolute:
        report = scenario.run_day(profiles, configs, policy, parse_list(c_ho), workers)
    else:
        lambda_max_list = parse_list(lambda_max)
        if not lambda_max_list:
            raise click.BadParameter("needs at least one value", param_hint="--lambda-max")
        report = scenario.run_scaled_days(profiles, configs, policy, parse_list(c_ho),
                                          lambda_max_list, rho_m_max, rho_s_max, workers)

    table = scenario.to_csv(report.rows, scenario.DAY_FIELDS)
    summary_json = json.dumps(to_dict(report.summaries), indent=2)
    _emit(table, out)
    _emit(summary_json + "\n", summary)

    infeasible = sum(s.infeasible_periods for s in report.summaries)
    if infeasible:
        logger.error(f"{infeasible} period evaluation(s) were macro-infeasible")
        sys.exit(EXIT_INFEASIBLE)


def _emit(text: str, path):
    if path is None:
        click.echo(text, nl=False)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


@cli.command()
@config_option
@click.option("--lambda-max", type=float, default=100.0, show_default=True)
@click.option("--points", type=int, default=50, show_default=True)
@click.option("--c-ho", "c_ho", default="0,1,2", show_default=True, help="comma separated, J")
@click.option("--rho-m", type=float, default=5.0, show_default=True)
@click.option("--rho-s", type=float, default=60.0, show_default=True)
@workers_option
@exits_on_error
def sweep(config_path, lambda_max, points, c_ho, rho_m, rho_s, workers):
    """EOTS gain against the energy arrival rate, CSV."""
    configs = scenario.load_config(config_path)
    grid = np.linspace(0.0, lambda_max, points)
    rows = scenario.sweep_gain(configs, snapshot_per_km2(rho_m, rho_s), grid,
                               parse_list(c_ho), workers)
    click.echo(scenario.to_csv(rows, scenario.SWEEP_FIELDS), nl=False)


@cli.command()
@config_option
@click.option("--r-th-max", type=float, default=200e3, show_default=True, help="bps")
@click.option("--points", type=int, default=8, show_default=True,
              help="R_th values, evenly spaced up to --r-th-max")
@click.option("--rho-m", type=float, default=validation.OUTAGE_RHO_M, show_default=True)
@click.option("--rho-s", type=float, default=validation.OUTAGE_RHO_S, show_default=True)
@click.option("--phi", type=float, default=0.5, show_default=True, help="offload fraction")
@click.option("--samples", type=int, default=5000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@workers_option
@exits_on_error
def outage(config_path, r_th_max, points, rho_m, rho_s, phi, samples, seed, workers):
    """Analytic and simulated outage against the rate threshold, CSV."""
    if points < 1 or not r_th_max > 0:
        raise click.BadParameter("need --points >= 1 and --r-th-max > 0")
    net, qos, _ = scenario.load_config(config_path)
    grid = np.linspace(r_th_max / points, r_th_max, points)
    rows = validation.outage_curve(net, qos, grid, samples, seed, phi,
                                   snapshot_per_km2(rho_m, rho_s), workers)
    click.echo(scenario.to_csv(rows, validation.OUTAGE_CURVE_FIELDS), nl=False)


@cli.command()
@config_option
@click.option("--suite", type=click.Choice([s.value for s in Suite]), default="all",
              show_default=True)
@click.option("--samples", type=int, default=5000, show_default=True,
              help="Monte Carlo users per outage case")
@click.option("--arrivals", type=int, default=1_000_000, show_default=True,
              help="energy arrivals per queue case")
@click.option("--seed", type=int, default=0, show_default=True)
@workers_option
@exits_on_error
def validate(config_path, suite, samples, arrivals, seed, workers):
    """Analytic-versus-simulated table; exit 3 if any tolerance fails."""
    net, qos, _ = scenario.load_config(config_path)
    rows = run_validation(Suite(suite), net, qos, samples, arrivals, seed, workers)
    click.echo(scenario.to_csv(rows, VALIDATION_FIELDS), nl=False)
    check_rows(rows)


if __name__ == '__main__':
    cli()
