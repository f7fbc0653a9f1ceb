"""
Daily traffic and harvested-energy profiles

A day is an ordered run of contiguous periods, each with constant user
densities and energy arrival rate. Profiles are read from CSV:

    start_s,duration_s,rho_m_per_km2,rho_s_per_km2,lambda_e_per_s[,label]

The shipped data/day24.csv holds fractions of the daily maxima and is scaled
with DailyProfiles.scaled before use.
"""

## built-in modules
import csv
import logging
import math
from pathlib import Path
from typing import List

from recordclass import recordclass

## local imports
from config.loader import ConfigLoader
from shapererrors import ProfileError

logger = logging.getLogger(__name__)

PROFILE_FIELDS = ("start_s", "duration_s", "rho_m_per_km2", "rho_s_per_km2", "lambda_e_per_s")
SECONDS_PER_HOUR = 3600.0

Period = recordclass("Period",
                     "start_s duration_s rho_m_per_km2 rho_s_per_km2 lambda_e_per_s label")

# traffic is lowest at 04:00 and peaks at 21:00; the sun is up 06:00 to 18:00
TRAFFIC_LOW_HOUR = 4
TRAFFIC_PEAK_HOUR = 21
TRAFFIC_FLOOR = 0.1
SUNRISE_HOUR = 6.0
SUNSET_HOUR = 18.0


class DailyProfiles:
    """
    Contiguous, non-overlapping periods of one day

    Attributes:
        periods: list of Period, in time order
        labels: free text describing the profile source
    """

    def __init__(self, periods: List[Period], labels: str = ""):
        self.periods = list(periods)
        self.labels = labels
        self.check()

    def check(self):
        if not self.periods:
            raise ProfileError("a profile needs at least one period")
        for i, p in enumerate(self.periods):
            if not p.duration_s > 0:
                raise ProfileError(f"period {i}: duration_s = {p.duration_s} must be > 0")
            for name in ("rho_m_per_km2", "rho_s_per_km2", "lambda_e_per_s"):
                if not getattr(p, name) >= 0:
                    raise ProfileError(f"period {i}: {name} = {getattr(p, name)} must be >= 0")
        for i, (prev, cur) in enumerate(zip(self.periods, self.periods[1:]), start=1):
            end = prev.start_s + prev.duration_s
            if math.isclose(cur.start_s, end, rel_tol=1e-9, abs_tol=1e-9):
                continue
            kind = "gap" if cur.start_s > end else "overlap"
            raise ProfileError(f"{kind} between period {i - 1} (ends {end:g} s) and "
                               f"period {i} (starts {cur.start_s:g} s)")

    @property
    def total_duration_s(self) -> float:
        return sum(p.duration_s for p in self.periods)

    def scaled(self, rho_m_max: float, rho_s_max: float, lambda_max: float) -> "DailyProfiles":
        """
        Multiply the density and energy columns, e.g. fractions -> absolute values
        """
        periods = [Period(p.start_s, p.duration_s, p.rho_m_per_km2 * rho_m_max,
                          p.rho_s_per_km2 * rho_s_max, p.lambda_e_per_s * lambda_max, p.label)
                   for p in self.periods]
        return DailyProfiles(periods, self.labels)

    def __len__(self):
        return len(self.periods)

    def __iter__(self):
        return iter(self.periods)

    def __repr__(self):
        return f"DailyProfiles({len(self.periods)} periods, {self.total_duration_s:g} s)"


def load_profiles(path) -> DailyProfiles:
    """
    Read and validate a profile CSV

    Throws:
        ProfileError naming the line for a bad header, a bad value, a gap or
        an overlap
    """
    path = Path(path)
    try:
        f = path.open(newline="", encoding="utf-8")
    except OSError as e:
        raise ProfileError(f"cannot read {path}: {e}")

    periods = []
    with f:
        reader = csv.DictReader(f)
        header = tuple(reader.fieldnames or ())
        missing = [name for name in PROFILE_FIELDS if name not in header]
        if missing:
            raise ProfileError(f"{path}: header lacks {', '.join(missing)}; expected "
                               f"{','.join(PROFILE_FIELDS)}", line=1)
        for row in reader:
            try:
                values = [ConfigLoader.str_to_float(row[name]) for name in PROFILE_FIELDS]
            except (TypeError, ValueError) as e:
                raise ProfileError(f"{path}: {e}", line=reader.line_num)
            periods.append(Period(*values, (row.get("label") or "").strip()))

    profiles = DailyProfiles(periods, labels=path.name)
    logger.info(f"loaded {profiles!r} from {path}")
    return profiles


def traffic_fraction(hour: float) -> float:
    """
    Share of the peak user density at a given hour: raised cosine from the
    04:00 floor up to the 21:00 peak, then back down
    """
    rise = TRAFFIC_PEAK_HOUR - TRAFFIC_LOW_HOUR
    t = (hour - TRAFFIC_LOW_HOUR) % 24
    if t <= rise:
        shape = (1 - math.cos(math.pi * t / rise)) / 2
    else:
        shape = (1 + math.cos(math.pi * (t - rise) / (24 - rise))) / 2
    return TRAFFIC_FLOOR + (1 - TRAFFIC_FLOOR) * shape


def solar_fraction(hour: float) -> float:
    """
    Share of the peak harvesting rate: half sine between sunrise and sunset
    """
    if not SUNRISE_HOUR <= hour <= SUNSET_HOUR:
        return 0.0
    return math.sin(math.pi * (hour - SUNRISE_HOUR) / (SUNSET_HOUR - SUNRISE_HOUR))


def synthetic_day(rho_m_max: float, rho_s_max: float, lambda_max: float) -> DailyProfiles:
    """
    24 hourly periods with evening-peaking traffic and noon-peaking solar harvest

    Traffic is taken at the start of each hour and harvest at its midpoint.
    data/day24.csv is synthetic_day(1, 1, 1) to six decimals.
    """
    periods = []
    for hour in range(24):
        traffic = traffic_fraction(hour)
        periods.append(Period(hour * SECONDS_PER_HOUR, SECONDS_PER_HOUR,
                              traffic * rho_m_max, traffic * rho_s_max,
                              solar_fraction(hour + 0.5) * lambda_max, f"{hour:02d}:00"))
    return DailyProfiles(periods, labels="synthetic day")
