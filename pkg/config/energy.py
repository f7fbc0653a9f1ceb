"""
Energy harvesting configuration section for the traffic shaper
"""

## local imports
from config.loader import ConfigLoader


class EnergyConfig(ConfigLoader):
    """
    Harvested energy arrives as Poisson units of E joules

    Attributes:
        arrival_rate_per_s: lambda_E, >= 0
        unit_joules: E, > 0
        handover_cost_j: C_ho, energy of one handover, >= 0
    """
    expected_root = "energy"
    FIELDS = {"lambda_e_per_s": "arrival_rate_per_s",
              "e_j": "unit_joules",
              "c_ho_j": "handover_cost_j"}
    DEFAULTS = {"arrival_rate_per_s": 0.0,
                "unit_joules": 1.0,
                "handover_cost_j": 0.0}

    def check(self):
        super().check()
        self.invariant(self.arrival_rate_per_s >= 0, "arrival_rate_per_s", ">= 0")
        self.invariant(self.unit_joules > 0, "unit_joules", "> 0")
        self.invariant(self.handover_cost_j >= 0, "handover_cost_j", ">= 0")

    def __repr__(self):
        if self._frozen:
            return (f"EnergyConfig(lambda_e={self.arrival_rate_per_s:g}/s, "
                    f"E={self.unit_joules:g} J, C_ho={self.handover_cost_j:g} J)")
        return "EnergyConfig"
