import numpy as np
import pytest
from hypothesis import settings

from campanato import Domain, GridFunction

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def line16():
    return Domain(1, 1.0, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_function(domain, seed):
    return GridFunction(domain, np.random.default_rng(seed).normal(size=domain.shape))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key, (passed, detail) in mod.RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {key}: {detail}")
