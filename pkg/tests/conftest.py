from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from wfanorm import fileformat
from wfanorm.sre import parse_sre

DATA = Path(__file__).parent / "data"

RUNNING_EXAMPLE_SRE = (
    "19/28:((4/19:ab + 15/19:a)(4/19:ab + 15/19:a)*[19/25])ab + 6/28:ab + 3/28:a(b)*[1/3]a"
)

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")


def load_data(name):
    return fileformat.load(DATA / name)


@pytest.fixture
def example():
    return load_data("example.json")


@pytest.fixture
def chain():
    return load_data("chain.json")


@pytest.fixture
def example_pa():
    return load_data("example_pa.json")


@pytest.fixture
def example_sre():
    return parse_sre(RUNNING_EXAMPLE_SRE)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
