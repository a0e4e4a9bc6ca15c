import numpy as np
import pytest
from hypothesis import settings

from learninit.problems import ToyAdvFamily

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture(scope="session")
def toy_family():
    return ToyAdvFamily()


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


VERDICTS = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def verdicts(request):
    return request.config.stash.setdefault(VERDICTS, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
