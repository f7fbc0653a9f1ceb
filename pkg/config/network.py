"""
Radio, geometry, power and QoS configuration sections for the traffic shaper

Values are SI throughout (m, W, Hz, bps, W/Hz). The noise density may be
given in dBm/MHz and is converted once, here.
"""

## built-in modules
import re
import xml.etree.ElementTree as ET

## local imports
from config.loader import ConfigLoader
from shapererrors import ConfigError


def dbm_per_mhz_to_w_per_hz(dbm_per_mhz: float) -> float:
    """
    Convert a noise density in dBm/MHz to W/Hz, e.g. -105 -> 3.162e-20
    """
    return 10.0 ** (dbm_per_mhz / 10.0) * 1e-3 / 1e6


class MacroConfig(ConfigLoader):
    """
    Macro base station: grid powered, covers a disc of radius D_m

    Attributes:
        coverage_radius_m: D_m
        static_power_w: P_0m
        tx_power_w: P_Tm
        amp_inefficiency: beta_m
        pathloss_exp: alpha_m, > 2
        bandwidth_hz: W_m
        interference_factor: theta_m
    """
    expected_root = "macro"
    FIELDS = {"d_m_m": "coverage_radius_m",
              "p_0m_w": "static_power_w",
              "p_tm_w": "tx_power_w",
              "beta_m": "amp_inefficiency",
              "alpha_m": "pathloss_exp",
              "w_m_hz": "bandwidth_hz",
              "theta_m": "interference_factor"}

    def check(self):
        super().check()
        for attr in ("coverage_radius_m", "static_power_w", "tx_power_w",
                     "amp_inefficiency", "bandwidth_hz"):
            self.invariant(getattr(self, attr) > 0, attr, "> 0")
        self.invariant(self.pathloss_exp > 2, "pathloss_exp", "> 2")
        self.invariant(self.interference_factor >= 0, "interference_factor", ">= 0")


class SmallCellConfig(ConfigLoader):
    """
    Off-grid small cell placed D_ms from the macro, radius D_s

    Attributes:
        coverage_radius_m: D_s
        static_power_w: P_0s
        tx_power_w: P_Ts
        amp_inefficiency: beta_s
        pathloss_exp: alpha_s, > 2
        bandwidth_hz: W_s
        interference_factor: theta_s
        macro_sc_distance_m: D_ms
    """
    expected_root = "sc"
    FIELDS = {"d_s_m": "coverage_radius_m",
              "p_0s_w": "static_power_w",
              "p_ts_w": "tx_power_w",
              "beta_s": "amp_inefficiency",
              "alpha_s": "pathloss_exp",
              "w_s_hz": "bandwidth_hz",
              "theta_s": "interference_factor",
              "d_ms_m": "macro_sc_distance_m"}

    def check(self):
        super().check()
        for attr in ("coverage_radius_m", "static_power_w", "tx_power_w",
                     "amp_inefficiency", "bandwidth_hz", "macro_sc_distance_m"):
            self.invariant(getattr(self, attr) > 0, attr, "> 0")
        self.invariant(self.pathloss_exp > 2, "pathloss_exp", "> 2")
        self.invariant(self.interference_factor >= 0, "interference_factor", ">= 0")


class QosSpec(ConfigLoader):
    """
    Per-user rate threshold, outage target, and noise density

    Attributes:
        rate_threshold_bps: R_th
        outage_target: eta, in (0, 1)
        noise_density_w_per_hz: sigma^2
    """
    expected_root = "qos"
    FIELDS = {"r_th_bps": "rate_threshold_bps",
              "rate_threshold_bps": "rate_threshold_bps",
              "eta": "outage_target",
              "sigma_w_per_hz": "noise_density_w_per_hz",
              "sigma_dbm_per_mhz": "noise_density_w_per_hz"}

    # '-105 dBm/MHz', '−105dBm/MHz', '3.2e-20 W/Hz'
    _UNIT = re.compile(r"\s*([-+−]?[\d.eE+-]+)\s*(dBm/MHz|W/Hz)?\s*", re.IGNORECASE)

    def parse_value(self, tag: str, text: str) -> float:
        if not tag.startswith("sigma"):
            return super().parse_value(tag, text)

        match = self._UNIT.fullmatch(text or "")
        if match is None:
            raise ValueError(f"cannot read a noise density from '{text}'")
        number, unit = match.groups()
        value = ConfigLoader.str_to_float(number.replace("−", "-"))
        unit = (unit or ("dBm/MHz" if tag == "sigma_dbm_per_mhz" else "W/Hz")).lower()
        if unit == "dbm/mhz":
            return dbm_per_mhz_to_w_per_hz(value)
        return value

    def check(self):
        super().check()
        self.invariant(self.rate_threshold_bps > 0, "rate_threshold_bps", "> 0")
        self.invariant(0 < self.outage_target < 1, "outage_target", "0 < eta < 1")
        self.invariant(self.noise_density_w_per_hz > 0, "noise_density_w_per_hz", "> 0")


class NetworkConfig:
    """
    Both tiers together, with the cross-tier geometry checks

    Attributes:
        macro: MacroConfig
        sc: SmallCellConfig
    """

    def __init__(self, macro: MacroConfig, sc: SmallCellConfig):
        self.macro = macro
        self.sc = sc
        self.check()

    def check(self):
        if not self.sc.coverage_radius_m < self.macro.coverage_radius_m:
            raise ConfigError(self.sc, "sc.d_s_m",
                              message=f"sc.d_s_m = {self.sc.coverage_radius_m} must be "
                                      f"smaller than macro.d_m_m = {self.macro.coverage_radius_m}")
        reach = self.sc.macro_sc_distance_m + self.sc.coverage_radius_m
        if reach > self.macro.coverage_radius_m:
            raise ConfigError(self.sc, "sc.d_ms_m",
                              message=f"small cell disc reaches {reach:g} m from the macro, "
                                      f"outside macro.d_m_m = {self.macro.coverage_radius_m}")

    @classmethod
    def from_tree(cls, root: ET.Element) -> "NetworkConfig":
        return cls(load_section(MacroConfig, root), load_section(SmallCellConfig, root))

    def with_(self, macro: dict = None, sc: dict = None) -> "NetworkConfig":
        return NetworkConfig(self.macro.with_(**(macro or {})), self.sc.with_(**(sc or {})))

    def __eq__(self, other):
        return isinstance(other, NetworkConfig) and (self.macro, self.sc) == (other.macro, other.sc)

    def __hash__(self):
        return hash((self.macro, self.sc))

    def __repr__(self):
        return "NetworkConfig"


def load_section(section_type, root: ET.Element) -> ConfigLoader:
    """
    Load, check and freeze one section from the config tree

    A section missing from the tree is still checked, so the first required
    key is reported as missing (unless every key has a default).
    """
    section = section_type()
    node = root.find(section_type.expected_root)
    if node is not None:
        section.load_xml(node)
    section.check()
    section.freeze()
    return section


def table1_network() -> NetworkConfig:
    """
    The reference two-tier deployment (EARTH-style power figures)
    """
    macro = MacroConfig(coverage_radius_m=1000.0, static_power_w=130.0, tx_power_w=20.0,
                        amp_inefficiency=4.7, pathloss_exp=3.5, bandwidth_hz=10e6,
                        interference_factor=1000.0)
    sc = SmallCellConfig(coverage_radius_m=300.0, static_power_w=56.0, tx_power_w=6.3,
                         amp_inefficiency=2.6, pathloss_exp=4.0, bandwidth_hz=10e6,
                         interference_factor=2000.0, macro_sc_distance_m=600.0)
    return NetworkConfig(macro, sc)


def table1_qos() -> QosSpec:
    return QosSpec(rate_threshold_bps=100e3, outage_target=0.05,
                   noise_density_w_per_hz=dbm_per_mhz_to_w_per_hz(-105.0))
