import pytest
from hypothesis import HealthCheck, settings

from leanslot import TABLE_II_CONSTANT_SLEEP, TABLE_II_SLEEP, class_b_model

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Reference setups used across the suite.
LOW_NOISE = 0.01
HIGH_NOISE = 5.0
# 20 MHz bandwidth with roll-off 0.1.
T_EE = 1.1 / 20e6


@pytest.fixture(scope="session")
def am():
    return class_b_model()


@pytest.fixture(scope="session")
def sm_const():
    return TABLE_II_CONSTANT_SLEEP


@pytest.fixture(scope="session")
def sm_table():
    return TABLE_II_SLEEP


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
