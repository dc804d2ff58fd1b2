import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def report_line(request):
    """Collects one status line per acceptance criterion for the run summary."""
    return request.config.stash.setdefault(_LINES, []).append


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("]")[1].split()[0])):
            terminalreporter.write_line(line)
