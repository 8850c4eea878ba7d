import pytest

from subgradnet.scenarios import get_scenario, run_scenario

_results = {}

acceptance_lines = []


@pytest.fixture(scope="session")
def scenario_cache():
    """Run each built-in scenario at most once per test session."""

    def fetch(name):
        if name not in _results:
            _results[name] = run_scenario(get_scenario(name))
        return _results[name]

    return fetch


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)
