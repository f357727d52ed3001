import pytest

from heightinterp.interp import build_profile


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def profile30():
    """The small test profile: N = 30, c_E = 4, m_max = 100."""
    return build_profile(N=30, m_max=100)


# verdict lines printed by the acceptance tests, repeated after the run so they
# show up even when output is captured
VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
