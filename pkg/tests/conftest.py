import pytest

from config.energy import EnergyConfig
from config.network import table1_network, table1_qos
from modelcore import derive_constants, snapshot_per_km2


@pytest.fixture
def net():
    return table1_network()


@pytest.fixture
def qos():
    return table1_qos()


@pytest.fixture
def consts(net, qos):
    return derive_constants(net, qos)


@pytest.fixture
def traffic():
    # a macro load the 10 MHz macro can carry with the SC switched off
    return snapshot_per_km2(5.0, 60.0)


def make_energy(lambda_e=0.0, c_ho=0.0, e_j=1.0) -> EnergyConfig:
    return EnergyConfig(arrival_rate_per_s=lambda_e, handover_cost_j=c_ho, unit_joules=e_j)
