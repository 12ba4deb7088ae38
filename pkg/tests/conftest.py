import pytest

from wpcn.channel import Topology
from wpcn.physics import SystemConfig, dbm_to_watt

P_A = dbm_to_watt(20.0)
N0 = dbm_to_watt(-160.0)

ACCEPTANCE_LINES = []


def reference_config(distances=(5.0, 10.0, 15.0), ppr=4.0, alpha=1.0, **kw):
    kw.setdefault("eta", 0.5)
    kw.setdefault("n0", N0)
    p_a = kw.pop("p_a", P_A)
    topology = Topology(tuple(distances), kw.pop("gamma", 2.0))
    return SystemConfig(topology=topology, p_a=p_a, p_p=ppr * p_a, alpha=alpha, **kw)


@pytest.fixture
def make_config():
    return reference_config


def record_acceptance(number, passed, detail):
    line = f"[criterion {number}] {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
